//! Energy-game semantics: capped energy levels, progress measures and the
//! worklist value iteration that computes the least one.

use std::collections::VecDeque;
use std::fmt;

use serde_json::{json, Map, Value};

use crate::arena::{Arc, ArcId, Arena, GameGraph, Owner, VertexId};

/// An energy level in `{0, ..., K} ∪ {⊤}`. `Top` compares above every finite level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnergyValue {
    Finite(i64),
    Top,
}

impl EnergyValue {
    pub fn is_top(self) -> bool {
        matches!(self, EnergyValue::Top)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            EnergyValue::Finite(n) => Some(n),
            EnergyValue::Top => None,
        }
    }
}

impl fmt::Display for EnergyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyValue::Finite(n) => write!(f, "{n}"),
            EnergyValue::Top => f.write_str("top"),
        }
    }
}

/// `a ⊖ w`: the credit needed before traversing an arc of weight `w` into a
/// vertex needing `a`. Clamps at 0 and saturates to `Top` past `cap`.
pub fn ominus(a: EnergyValue, w: i64, cap: i64) -> EnergyValue {
    match a {
        EnergyValue::Top => EnergyValue::Top,
        EnergyValue::Finite(n) => match n.checked_sub(w) {
            Some(d) if d <= cap => EnergyValue::Finite(d.max(0)),
            _ => EnergyValue::Top,
        },
    }
}

/// A total map from vertices to energy levels, tagged with its cap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EnergyFunction {
    cap: i64,
    values: Vec<EnergyValue>,
}

impl EnergyFunction {
    pub fn new(cap: i64, values: Vec<EnergyValue>) -> Self {
        EnergyFunction { cap, values }
    }

    pub fn zero(cap: i64, n: usize) -> Self {
        Self::new(cap, vec![EnergyValue::Finite(0); n])
    }

    pub fn top(cap: i64, n: usize) -> Self {
        Self::new(cap, vec![EnergyValue::Top; n])
    }

    pub fn from_finite(cap: i64, values: &[i64]) -> Self {
        Self::new(cap, values.iter().map(|&n| EnergyValue::Finite(n)).collect())
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn values(&self) -> &[EnergyValue] {
        &self.values
    }

    pub fn get(&self, v: VertexId) -> EnergyValue {
        self.values[v]
    }

    pub fn set(&mut self, v: VertexId, value: EnergyValue) {
        self.values[v] = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `V_f`: vertices with a finite level.
    pub fn finite_vertices(&self) -> Vec<VertexId> {
        (0..self.values.len())
            .filter(|&v| !self.values[v].is_top())
            .collect()
    }

    pub fn is_all_finite(&self) -> bool {
        self.values.iter().all(|v| !v.is_top())
    }

    /// Pointwise `self ⪯ other`.
    pub fn le(&self, other: &EnergyFunction) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Whether `(u, v)` satisfies `f(u) ⪰ f(v) ⊖ w(u, v)`.
    pub fn compatible(&self, arc: &Arc) -> bool {
        self.values[arc.src] >= ominus(self.values[arc.dst], arc.weight, self.cap)
    }

    pub fn to_json(&self, arena: &Arena) -> Value {
        let mut values = Map::new();
        for v in arena.vertices() {
            let entry = match self.values[v] {
                EnergyValue::Finite(n) => json!(n),
                EnergyValue::Top => json!("top"),
            };
            values.insert(arena.name(v).to_owned(), entry);
        }
        json!({ "cap": self.cap, "scale": arena.scale(), "values": values })
    }

    /// Compact `name=level` rendering in vertex order.
    pub fn render(&self, arena: &Arena) -> String {
        arena
            .vertices()
            .map(|v| format!("{}={}", arena.name(v), self.values[v]))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn holds_at(graph: &impl GameGraph, f: &EnergyFunction, u: VertexId) -> bool {
    let mut arcs = graph.successors(u).map(|(_, a)| f.compatible(a));
    match graph.owner(u) {
        Owner::Zero => arcs.any(|ok| ok),
        Owner::One => arcs.all(|ok| ok),
    }
}

/// Checks the progress-measure conditions: some compatible arc at every
/// Player-0 vertex, only compatible arcs at every Player-1 vertex.
pub fn is_sepm(graph: &impl GameGraph, f: &EnergyFunction) -> bool {
    f.len() == graph.vertex_count() && (0..graph.vertex_count()).all(|u| holds_at(graph, f, u))
}

/// Work counters from one value iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LiftStats {
    pub lifts: u64,
    pub to_top: u64,
}

/// The least SEPM of `graph` with the graph's own cap.
pub fn least_sepm(graph: &impl GameGraph, seed: Option<&EnergyFunction>) -> EnergyFunction {
    least_sepm_capped(graph, graph.arena().cap(), seed).0
}

/// Worklist value iteration from `seed` (all zeros if absent) up to the least
/// fixpoint. `seed` must lie pointwise below the answer.
pub fn least_sepm_capped(
    graph: &impl GameGraph,
    cap: i64,
    seed: Option<&EnergyFunction>,
) -> (EnergyFunction, LiftStats) {
    let n = graph.vertex_count();
    let mut f = match seed {
        Some(s) => {
            debug_assert_eq!(s.len(), n);
            EnergyFunction::new(cap, s.values.clone())
        }
        None => EnergyFunction::zero(cap, n),
    };
    let mut stats = LiftStats::default();
    // Player-0 vertices: number of currently compatible out-arcs.
    let mut support = vec![0usize; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();

    let count_support = |f: &EnergyFunction, u: VertexId| {
        graph.successors(u).filter(|(_, a)| f.compatible(a)).count()
    };

    for u in 0..n {
        if graph.owner(u) == Owner::Zero {
            support[u] = count_support(&f, u);
        }
        if !holds_at(graph, &f, u) {
            queued[u] = true;
            queue.push_back(u);
        }
    }

    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        let needs = graph.successors(u).map(|(_, a)| ominus(f.get(a.dst), a.weight, cap));
        let lifted = match graph.owner(u) {
            Owner::Zero => needs.min(),
            Owner::One => needs.max(),
        }
        .expect("no dead ends");
        let old = f.get(u);
        if lifted <= old {
            continue;
        }
        f.set(u, lifted);
        stats.lifts += 1;
        if lifted.is_top() {
            stats.to_top += 1;
        }

        for (_, arc) in graph.predecessors(u) {
            let p = arc.src;
            if p == u || queued[p] {
                continue;
            }
            let level = f.get(p);
            let before = level >= ominus(old, arc.weight, cap);
            let after = level >= ominus(lifted, arc.weight, cap);
            if before && !after {
                match graph.owner(p) {
                    Owner::Zero => {
                        support[p] -= 1;
                        if support[p] == 0 {
                            queued[p] = true;
                            queue.push_back(p);
                        }
                    }
                    Owner::One => {
                        queued[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }

        if graph.owner(u) == Owner::Zero {
            support[u] = count_support(&f, u);
        }
        if !holds_at(graph, &f, u) {
            queued[u] = true;
            queue.push_back(u);
        }
    }
    (f, stats)
}

/// Player 0's and Player 1's winning regions of the energy game, as the finite
/// and infinite support of the least SEPM.
pub fn winning_regions(graph: &impl GameGraph) -> (Vec<VertexId>, Vec<VertexId>) {
    let f = least_sepm(graph, None);
    regions_of(&f)
}

pub fn regions_of(f: &EnergyFunction) -> (Vec<VertexId>, Vec<VertexId>) {
    (0..f.len()).partition(|&v| !f.get(v).is_top())
}

/// Out-arcs of `u` compatible with `f`.
pub fn compatible_arcs(graph: &impl GameGraph, f: &EnergyFunction, u: VertexId) -> Vec<ArcId> {
    graph
        .successors(u)
        .filter(|(_, a)| f.compatible(a))
        .map(|(id, _)| id)
        .collect()
}
