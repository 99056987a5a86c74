//! Positional strategies, the one-player graphs they induce, and least feasible
//! potentials on those graphs.

use bitvec::vec::BitVec;
use serde_json::{json, Map, Value};

use crate::arena::{ArcId, Arena, GameGraph, Owner, SubArena, VertexId};
use crate::energy::{EnergyFunction, EnergyValue};
use crate::error::{Result, SolveError};

/// A memoryless Player-0 strategy: one successor per Player-0 vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionalStrategy {
    choice: Vec<Option<VertexId>>,
}

impl PositionalStrategy {
    pub fn new(choice: Vec<Option<VertexId>>) -> Self {
        PositionalStrategy { choice }
    }

    /// Picks the arc with the given index at each listed vertex.
    pub fn from_arcs(arena: &Arena, arcs: impl IntoIterator<Item = ArcId>) -> Self {
        let mut choice = vec![None; arena.vertex_count()];
        for id in arcs {
            let a = arena.arc(id);
            choice[a.src] = Some(a.dst);
        }
        PositionalStrategy { choice }
    }

    /// Builds a strategy from `(vertex, successor)` names; vertices not listed
    /// must have a single successor, which is taken.
    pub fn from_names(arena: &Arena, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut choice = vec![None; arena.vertex_count()];
        for &(u, v) in pairs {
            let (Some(u), Some(v)) = (arena.vertex(u), arena.vertex(v)) else {
                return Err(SolveError::InvalidStrategy(format!("unknown vertex in ({u}, {v})")));
            };
            choice[u] = Some(v);
        }
        for u in arena.player_vertices(Owner::Zero) {
            if choice[u].is_none() && arena.out_degree(u) == 1 {
                choice[u] = Some(arena.arc(arena.out_arcs(u).start).dst);
            }
        }
        let s = PositionalStrategy { choice };
        s.validate(arena)?;
        Ok(s)
    }

    pub fn choice(&self, u: VertexId) -> Option<VertexId> {
        self.choice.get(u).copied().flatten()
    }

    pub fn choices(&self) -> &[Option<VertexId>] {
        &self.choice
    }

    pub fn validate(&self, arena: &Arena) -> Result<()> {
        if self.choice.len() != arena.vertex_count() {
            return Err(SolveError::InvalidStrategy(format!(
                "{} entries for {} vertices",
                self.choice.len(),
                arena.vertex_count()
            )));
        }
        for u in arena.vertices() {
            match (arena.owner(u), self.choice[u]) {
                (Owner::Zero, Some(v)) if arena.find_arc(u, v).is_some() => {}
                (Owner::Zero, Some(v)) => {
                    return Err(SolveError::InvalidStrategy(format!(
                        "no arc ({}, {})",
                        arena.name(u),
                        arena.name(v)
                    )))
                }
                (Owner::Zero, None) => {
                    return Err(SolveError::InvalidStrategy(format!(
                        "no move at `{}`",
                        arena.name(u)
                    )))
                }
                (Owner::One, Some(_)) => {
                    return Err(SolveError::InvalidStrategy(format!(
                        "move given at Player-1 vertex `{}`",
                        arena.name(u)
                    )))
                }
                (Owner::One, None) => {}
            }
        }
        Ok(())
    }

    pub fn to_json(&self, arena: &Arena) -> Value {
        let mut choice = Map::new();
        for (u, v) in self.choice.iter().enumerate() {
            if let Some(v) = v {
                choice.insert(arena.name(u).to_owned(), json!(arena.name(*v)));
            }
        }
        json!({ "choice": choice })
    }

    pub fn render(&self, arena: &Arena) -> String {
        self.choice
            .iter()
            .enumerate()
            .filter_map(|(u, v)| v.map(|v| format!("{}->{}", arena.name(u), arena.name(v))))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `G(Γ, σ)`: the arena keeping only σ's arcs at Player-0 vertices.
#[derive(Clone, Debug)]
pub struct OnePlayerGraph<'a>(SubArena<'a>);

impl GameGraph for OnePlayerGraph<'_> {
    fn arena(&self) -> &Arena {
        self.0.arena()
    }

    fn retains(&self, arc: ArcId) -> bool {
        self.0.retains(arc)
    }
}

impl OnePlayerGraph<'_> {
    pub fn arc_count(&self) -> usize {
        self.0.retained().count_ones()
    }
}

pub fn restrict<'a>(arena: &'a Arena, strategy: &PositionalStrategy) -> Result<OnePlayerGraph<'a>> {
    strategy.validate(arena)?;
    let mut retained = BitVec::repeat(true, arena.arc_count());
    for u in arena.player_vertices(Owner::Zero) {
        let chosen = strategy.choice[u];
        for id in arena.out_arcs(u) {
            retained.set(id, Some(arena.arc(id).dst) == chosen);
        }
    }
    Ok(OnePlayerGraph(SubArena::new(arena, retained)))
}

/// Least `π` with `π(u) ⪰ π(v) ⊖ w(u, v)` on every arc of `graph`.
///
/// Bellman-Ford relaxation of `π(u) ← max(π(u), π(v) - w)` from all zeros; the
/// `max` with the current value keeps levels clamped at 0. Vertices still
/// relaxing after `|V|` rounds sit on or reach a negative cycle and, with
/// everything that reaches them, become `⊤`.
pub fn least_feasible_potential(graph: &impl GameGraph, cap: i64) -> Result<EnergyFunction> {
    let n = graph.vertex_count();
    let arcs: Vec<_> = graph.retained_arcs().map(|(_, a)| *a).collect();
    let mut pi = vec![0i64; n];
    let relax = |pi: &mut [i64], changed: &mut Vec<VertexId>| -> Result<()> {
        for a in &arcs {
            let need = pi[a.dst]
                .checked_sub(a.weight)
                .ok_or_else(|| SolveError::Internal("potential overflow".into()))?;
            if need > pi[a.src] {
                pi[a.src] = need;
                changed.push(a.src);
            }
        }
        Ok(())
    };
    let mut changed = Vec::new();
    for _ in 0..n {
        changed.clear();
        relax(&mut pi, &mut changed)?;
        if changed.is_empty() {
            break;
        }
    }
    let mut top = vec![false; n];
    if !changed.is_empty() {
        changed.clear();
        relax(&mut pi, &mut changed)?;
        let mut stack = changed.clone();
        for &v in &changed {
            top[v] = true;
        }
        while let Some(v) = stack.pop() {
            for (_, a) in graph.predecessors(v) {
                if !top[a.src] {
                    top[a.src] = true;
                    stack.push(a.src);
                }
            }
        }
    }
    let mut values = Vec::with_capacity(n);
    for v in 0..n {
        if top[v] {
            values.push(EnergyValue::Top);
        } else if pi[v] > cap {
            return Err(SolveError::Internal(format!(
                "finite potential {} exceeds cap {cap} at `{}`",
                pi[v],
                graph.arena().name(v)
            )));
        } else {
            values.push(EnergyValue::Finite(pi[v]));
        }
    }
    Ok(EnergyFunction::new(cap, values))
}

/// True iff `graph` has no cycle of negative total weight.
pub fn is_conservative(graph: &impl GameGraph) -> bool {
    let n = graph.vertex_count();
    let mut dist = vec![0i128; n];
    for round in 0..=n {
        let mut changed = false;
        for (_, a) in graph.retained_arcs() {
            let cand = dist[a.src] + a.weight as i128;
            if cand < dist[a.dst] {
                dist[a.dst] = cand;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
        if round == n {
            return false;
        }
    }
    true
}

/// `σ ∈ Δ(f)`: the least feasible potential of `G(arena, σ)` equals `f`.
pub fn delta_membership(
    arena: &Arena,
    f: &EnergyFunction,
    strategy: &PositionalStrategy,
) -> Result<bool> {
    let graph = restrict(arena, strategy)?;
    Ok(least_feasible_potential(&graph, f.cap())? == *f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{parse_arena, reweight};
    use crate::energy::{is_sepm, least_sepm};
    use crate::fixtures;
    use crate::rational::Rational;

    fn shifted() -> Arena {
        reweight(&fixtures::gamma_ex(), Rational::from_integer(-1)).unwrap()
    }

    fn at_e(a: &Arena, target: &str) -> PositionalStrategy {
        PositionalStrategy::from_names(a, &[("E", target), ("B", "C"), ("D", "A"), ("G", "F")]).unwrap()
    }

    fn levels(a: &Arena, f: &EnergyFunction) -> Vec<i64> {
        a.vertices().map(|v| f.get(v).finite().unwrap()).collect()
    }

    #[test]
    fn restrict_keeps_strategy_arcs() {
        let a = shifted();
        let g = restrict(&a, &at_e(&a, "F")).unwrap();
        assert_eq!(g.arc_count(), 7);

        let single = parse_arena("v a 0\nv b 1\ne a b 1\ne b a -1\ne b b 0\n").unwrap();
        let s = PositionalStrategy::from_names(&single, &[]).unwrap();
        assert_eq!(restrict(&single, &s).unwrap().arc_count(), 3);

        let bogus = PositionalStrategy::new(vec![Some(0), None]);
        assert!(matches!(restrict(&single, &bogus), Err(SolveError::InvalidStrategy(_))));
    }

    #[test]
    fn potentials_of_example_strategies() {
        let a = shifted();
        let f1 = least_feasible_potential(&restrict(&a, &at_e(&a, "F")).unwrap(), a.cap()).unwrap();
        assert_eq!(levels(&a, &f1), [0, 4, 8, 4, 3, 4, 0]);
        let f2 = least_feasible_potential(&restrict(&a, &at_e(&a, "C")).unwrap(), a.cap()).unwrap();
        assert_eq!(levels(&a, &f2), [0, 4, 8, 4, 7, 4, 0]);
        assert!(is_sepm(&a, &f1) && is_sepm(&a, &f2));
    }

    #[test]
    fn negative_cycles_become_top() {
        let a = parse_arena("v a 1\nv b 1\nv c 1\ne a b 0\ne b b -1\ne c a 2\ne c c 0\n").unwrap();
        let pi = least_feasible_potential(&a, a.cap()).unwrap();
        assert_eq!(pi.values(), [EnergyValue::Top, EnergyValue::Top, EnergyValue::Top]);
        assert!(!is_conservative(&a));

        let ok = parse_arena("v a 1\nv b 1\ne a b -2\ne b b 0\n").unwrap();
        let pi = least_feasible_potential(&ok, ok.cap()).unwrap();
        assert_eq!(pi, EnergyFunction::from_finite(2, &[2, 0]));
        assert!(is_conservative(&ok));
    }

    #[test]
    fn optimal_example_strategies_are_conservative() {
        let a = shifted();
        for target in ["A", "C", "F", "G"] {
            assert!(is_conservative(&restrict(&a, &at_e(&a, target)).unwrap()));
        }
    }

    #[test]
    fn delta_membership_cases() {
        let a = shifted();
        let f1 = least_feasible_potential(&restrict(&a, &at_e(&a, "F")).unwrap(), a.cap()).unwrap();
        assert!(delta_membership(&a, &f1, &at_e(&a, "F")).unwrap());
        assert!(!delta_membership(&a, &f1, &at_e(&a, "A")).unwrap());
        let fstar = least_sepm(&a, None);
        assert!(delta_membership(&a, &fstar, &at_e(&a, "G")).unwrap());
    }

    #[test]
    fn strategy_json() {
        let a = shifted();
        let v = at_e(&a, "G").to_json(&a);
        assert_eq!(v["choice"]["E"], "G");
        assert!(v["choice"].get("A").is_none());
    }
}
