//! Enumeration of the extremal progress measures of a ν-valued game and of the
//! basic subgames that carry them, plus the induced partition of the optimal
//! strategies.
//!
//! Starting from the whole (reweighted) arena, each subgame's least SEPM `f` is
//! computed; for every Player-0 vertex `u` with arcs strictly incompatible with
//! `f`, a child subgame keeps *only* those arcs at `u`. Children that Player 0
//! still wins everywhere are stored, their least SEPMs emitted if new, and then
//! expanded depth-first in stack order. A store of visited subgames and emitted
//! functions guarantees each is produced once.

use std::collections::HashMap;

use bitvec::vec::BitVec;
use serde_json::{json, Value};

use crate::arena::{reweight, ArcId, Arena, GameGraph, Owner, SubgameMask, VertexId};
use crate::energy::{compatible_arcs, least_sepm_capped, ominus, EnergyFunction, LiftStats};
use crate::error::{Result, SolveError};
use crate::oracle::strategy_product;
use crate::potentials::{delta_membership, PositionalStrategy};
use crate::rational::Rational;

/// Exact-membership index over subgames (keyed by retained arcs) and energy
/// functions (keyed by their value vectors).
#[derive(Debug, Default)]
pub struct SubgameStore {
    subgames: HashMap<BitVec, usize>,
    sepms: HashMap<EnergyFunction, usize>,
    duplicate_inserts: usize,
}

impl SubgameStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains_subgame(&self, mask: &SubgameMask) -> bool {
        self.subgames.contains_key(mask.retained())
    }

    pub fn subgame_id(&self, mask: &SubgameMask) -> Option<usize> {
        self.subgames.get(mask.retained()).copied()
    }

    /// Inserts and returns the new id, or the existing id (counted as a duplicate).
    pub fn insert_subgame(&mut self, mask: &SubgameMask) -> usize {
        let next = self.subgames.len();
        match self.subgames.get(mask.retained()) {
            Some(&id) => {
                self.duplicate_inserts += 1;
                id
            }
            None => {
                self.subgames.insert(mask.retained().clone(), next);
                next
            }
        }
    }

    pub fn contains_sepm(&self, f: &EnergyFunction) -> bool {
        self.sepms.contains_key(f)
    }

    pub fn sepm_id(&self, f: &EnergyFunction) -> Option<usize> {
        self.sepms.get(f).copied()
    }

    pub fn insert_sepm(&mut self, f: &EnergyFunction) -> usize {
        let next = self.sepms.len();
        match self.sepms.get(f) {
            Some(&id) => {
                self.duplicate_inserts += 1;
                id
            }
            None => {
                self.sepms.insert(f.clone(), next);
                next
            }
        }
    }

    pub fn subgame_count(&self) -> usize {
        self.subgames.len()
    }

    pub fn sepm_count(&self) -> usize {
        self.sepms.len()
    }

    /// Inserts of an already-present item. Zero for a correct enumeration.
    pub fn duplicate_inserts(&self) -> usize {
        self.duplicate_inserts
    }
}

/// The extremal SEPMs in emission order; element 0 is the root's least SEPM,
/// which is also the pointwise least element.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnergyLattice {
    pub elements: Vec<EnergyFunction>,
}

impl EnergyLattice {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn least(&self) -> &EnergyFunction {
        &self.elements[0]
    }

    pub fn contains(&self, f: &EnergyFunction) -> bool {
        self.elements.contains(f)
    }
}

#[derive(Clone, Debug)]
pub struct SubgameNode {
    pub mask: SubgameMask,
    /// Index of this subgame's least SEPM in the [`EnergyLattice`].
    pub least_sepm: usize,
    /// The subgame whose expansion inserted this one (`None` for the root).
    pub parent: Option<usize>,
    /// Every subgame that generated this one as a child, including those that
    /// found it already stored.
    pub generated_by: Vec<usize>,
    /// The Player-0 vertex whose arcs were narrowed to create this subgame.
    pub narrowed: Option<VertexId>,
    /// Work done computing the least SEPM (seeded from the parent).
    pub lifts: LiftStats,
}

/// Basic subgames in insertion order (root first) and the map `φ` to their least SEPMs.
#[derive(Clone, Debug, Default)]
pub struct SubgameLattice {
    pub nodes: Vec<SubgameNode>,
}

impl SubgameLattice {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn phi(&self, node: usize) -> usize {
        self.nodes[node].least_sepm
    }

    /// `(parent, child)` pairs of the recursion tree.
    pub fn recursion_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.parent.map(|p| (p, i)))
    }
}

/// Progress notifications, delivered as soon as each item is discovered.
#[derive(Clone, Copy, Debug)]
pub enum EnumEvent<'a> {
    Subgame { id: usize, node: &'a SubgameNode },
    Sepm { id: usize, f: &'a EnergyFunction },
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub nu: Rational,
    /// The arena reweighted by `w - ν` (integer-scaled).
    pub reweighted: Arena,
    pub energy: EnergyLattice,
    pub subgames: SubgameLattice,
    /// Duplicate-insert count from the store audit.
    pub duplicate_inserts: usize,
}

impl Enumeration {
    pub fn is_degenerate(&self) -> bool {
        self.subgames.len() > self.energy.len()
    }
}

/// Player-0 arcs out of `u` with `f(u) ≺ f(v) ⊖ w(u, v)`.
pub fn incompatible_arcs(graph: &impl GameGraph, f: &EnergyFunction, u: VertexId) -> Vec<ArcId> {
    graph
        .successors(u)
        .filter(|(_, a)| f.get(u) < ominus(f.get(a.dst), a.weight, f.cap()))
        .map(|(id, _)| id)
        .collect()
}

struct Enumerator<'a, 'o> {
    arena: &'a Arena,
    cap: i64,
    store: SubgameStore,
    energy: EnergyLattice,
    subgames: SubgameLattice,
    observer: &'o mut dyn FnMut(EnumEvent<'_>),
}

impl Enumerator<'_, '_> {
    fn add_node(&mut self, node: SubgameNode) -> usize {
        let id = self.store.insert_subgame(&node.mask);
        debug_assert_eq!(id, self.subgames.nodes.len());
        log::debug!(
            "subgame {id}: {} arcs removed, {} lifts",
            node.mask.removed().len(),
            node.lifts.lifts
        );
        self.subgames.nodes.push(node);
        (self.observer)(EnumEvent::Subgame {
            id,
            node: &self.subgames.nodes[id],
        });
        id
    }

    fn sepm_index(&mut self, f: EnergyFunction) -> usize {
        if let Some(id) = self.store.sepm_id(&f) {
            return id;
        }
        let id = self.store.insert_sepm(&f);
        self.energy.elements.push(f);
        (self.observer)(EnumEvent::Sepm {
            id,
            f: &self.energy.elements[id],
        });
        id
    }

    fn expand(&mut self, node: usize) {
        let mask = self.subgames.nodes[node].mask.clone();
        let f = self.energy.elements[self.subgames.nodes[node].least_sepm].clone();
        let view = mask.view(self.arena);
        let mut stack = Vec::new();
        for u in self.arena.player_vertices(Owner::Zero) {
            let narrowed_arcs = incompatible_arcs(&view, &f, u);
            if narrowed_arcs.is_empty() {
                continue;
            }
            let child = mask.restrict_vertex(self.arena, u, &narrowed_arcs);
            if let Some(existing) = self.store.subgame_id(&child) {
                self.subgames.nodes[existing].generated_by.push(node);
                continue;
            }
            let (child_f, lifts) = least_sepm_capped(&child.view(self.arena), self.cap, Some(&f));
            if !child_f.is_all_finite() {
                continue;
            }
            let least_sepm = self.sepm_index(child_f);
            let id = self.add_node(SubgameNode {
                mask: child,
                least_sepm,
                parent: Some(node),
                generated_by: vec![node],
                narrowed: Some(u),
                lifts,
            });
            stack.push(id);
        }
        while let Some(child) = stack.pop() {
            self.expand(child);
        }
    }
}

/// Enumerates the extremal SEPMs and basic subgames of a `nu`-valued arena.
pub fn enumerate(arena: &Arena, nu: Rational) -> Result<Enumeration> {
    enumerate_with(arena, nu, &mut |_| {})
}

/// As [`enumerate`], reporting each subgame and SEPM to `observer` the moment
/// it is first found.
pub fn enumerate_with(
    arena: &Arena,
    nu: Rational,
    observer: &mut dyn FnMut(EnumEvent<'_>),
) -> Result<Enumeration> {
    let reweighted = reweight(arena, nu)?;
    let cap = reweighted.cap();
    let root = SubgameMask::full(&reweighted);
    let (f, lifts) = least_sepm_capped(&reweighted, cap, None);
    if let Some(v) = f.values().iter().position(|x| x.is_top()) {
        return Err(SolveError::NotValued {
            nu: nu.to_string(),
            vertex: arena.name(v).to_owned(),
        });
    }
    let mut run = Enumerator {
        arena: &reweighted,
        cap,
        store: SubgameStore::new(),
        energy: EnergyLattice::default(),
        subgames: SubgameLattice::default(),
        observer,
    };
    let least_sepm = run.sepm_index(f);
    let root_id = run.add_node(SubgameNode {
        mask: root,
        least_sepm,
        parent: None,
        generated_by: Vec::new(),
        narrowed: None,
        lifts,
    });
    run.expand(root_id);
    let Enumerator {
        store,
        energy,
        subgames,
        ..
    } = run;
    log::info!(
        "value {nu}: {} extremal SEPMs over {} basic subgames",
        energy.len(),
        subgames.len()
    );
    Ok(Enumeration {
        nu,
        duplicate_inserts: store.duplicate_inserts(),
        reweighted,
        energy,
        subgames,
    })
}

/// `Δ(f)`: the optimal strategies whose least feasible potential is `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaBlock {
    pub sepm_id: usize,
    /// Exact size of the block.
    pub count: u128,
    /// The first `limit` members, in product order.
    pub strategies: Vec<PositionalStrategy>,
}

/// Partitions the optimal strategies by extremal SEPM.
///
/// Candidates for `Δ(f)` are the product of `f`-compatible arcs. For the least
/// element every candidate qualifies and the count is a product of degrees;
/// other blocks are filtered by recomputing each candidate's potential.
pub fn decompose(
    arena: &Arena,
    nu: Rational,
    lattice: &EnergyLattice,
    limit: usize,
) -> Result<Vec<DeltaBlock>> {
    let reweighted = reweight(arena, nu)?;
    let mut blocks = Vec::with_capacity(lattice.len());
    for (sepm_id, f) in lattice.elements.iter().enumerate() {
        let options: Vec<(VertexId, Vec<VertexId>)> = reweighted
            .player_vertices(Owner::Zero)
            .map(|u| {
                let targets = compatible_arcs(&reweighted, f, u)
                    .into_iter()
                    .map(|id| reweighted.arc(id).dst)
                    .collect();
                (u, targets)
            })
            .collect();
        let candidates = strategy_product(reweighted.vertex_count(), options.clone());
        let block = if sepm_id == 0 {
            let count = options
                .iter()
                .try_fold(1u128, |acc, (_, t)| acc.checked_mul(t.len() as u128))
                .ok_or_else(|| SolveError::Internal("strategy count overflows u128".into()))?;
            DeltaBlock {
                sepm_id,
                count,
                strategies: candidates.take(limit).collect(),
            }
        } else {
            let mut count = 0u128;
            let mut strategies = Vec::new();
            for s in candidates {
                if delta_membership(&reweighted, f, &s)? {
                    count += 1;
                    if strategies.len() < limit {
                        strategies.push(s);
                    }
                }
            }
            DeltaBlock {
                sepm_id,
                count,
                strategies,
            }
        };
        blocks.push(block);
    }
    Ok(blocks)
}

/// JSON report for one value class.
pub fn enumeration_json(
    arena: &Arena,
    run: &Enumeration,
    blocks: &[DeltaBlock],
) -> Value {
    let sepms: Vec<Value> = run
        .energy
        .elements
        .iter()
        .map(|f| f.to_json(&run.reweighted))
        .collect();
    let subgames: Vec<Value> = run
        .subgames
        .nodes
        .iter()
        .enumerate()
        .map(|(id, node)| {
            let removed: Vec<Value> = node
                .mask
                .removed()
                .into_iter()
                .map(|arc| {
                    let a = arena.arc(arc);
                    json!([arena.name(a.src), arena.name(a.dst)])
                })
                .collect();
            json!({
                "id": id,
                "removed_arcs": removed,
                "least_sepm_id": node.least_sepm,
                "parent_ids": node.generated_by,
            })
        })
        .collect();
    let decomposition: Vec<Value> = blocks
        .iter()
        .map(|b| {
            json!({
                "sepm_id": b.sepm_id,
                "count": b.count,
                "strategies": b.strategies.iter().map(|s| s.to_json(arena)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "nu": { "num": run.nu.num(), "den": run.nu.den() },
        "extremal_sepms": sepms,
        "basic_subgames": subgames,
        "decomposition": decomposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::parse_arena;
    use crate::energy::{is_sepm, least_sepm};
    use crate::fixtures;

    fn levels(f: &EnergyFunction) -> Vec<i64> {
        f.values().iter().map(|v| v.finite().unwrap()).collect()
    }

    #[test]
    fn store_membership() {
        let a = fixtures::gamma_ex();
        let mut store = SubgameStore::new();
        let full = SubgameMask::full(&a);
        assert!(!store.contains_subgame(&full));
        assert_eq!(store.insert_subgame(&full), 0);
        assert!(store.contains_subgame(&full));
        assert_eq!(store.insert_subgame(&full), 0);
        assert_eq!(store.duplicate_inserts(), 1);
        let f = EnergyFunction::zero(3, 7);
        assert!(!store.contains_sepm(&f));
        store.insert_sepm(&f);
        assert!(store.contains_sepm(&f));
    }

    #[test]
    fn incompatible_arcs_cases() {
        let a = reweight(&fixtures::gamma_ex(), Rational::from_integer(-1)).unwrap();
        let f = least_sepm(&a, None);
        let e = a.vertex("E").unwrap();
        let targets: Vec<&str> = incompatible_arcs(&a, &f, e)
            .into_iter()
            .map(|id| a.name(a.arc(id).dst))
            .collect();
        assert_eq!(targets, ["C", "F"]);

        let d = fixtures::gamma_d();
        let fd = least_sepm(&d, None);
        let t = d.vertex("t").unwrap();
        assert_eq!(
            incompatible_arcs(&d, &fd, t),
            vec![d.find_arc(t, d.vertex("u4").unwrap()).unwrap()]
        );
        assert!(incompatible_arcs(&a, &EnergyFunction::top(a.cap(), 7), e).is_empty());
    }

    #[test]
    fn example_lattice() {
        let ex = fixtures::gamma_ex();
        let run = enumerate(&ex, Rational::from_integer(-1)).unwrap();
        let got: Vec<Vec<i64>> = run.energy.elements.iter().map(levels).collect();
        assert_eq!(
            got,
            [
                vec![0, 4, 8, 4, 0, 4, 0],
                vec![0, 4, 8, 4, 3, 4, 0],
                vec![0, 4, 8, 4, 7, 4, 0]
            ]
        );
        assert_eq!(run.subgames.len(), 3);
        assert_eq!(run.duplicate_inserts, 0);
        assert!(!run.is_degenerate());
        for f in &run.energy.elements {
            assert!(is_sepm(&run.reweighted, f));
            assert!(run.energy.least().le(f));
        }

        let blocks = decompose(&ex, Rational::from_integer(-1), &run.energy, 10).unwrap();
        let counts: Vec<u128> = blocks.iter().map(|b| b.count).collect();
        assert_eq!(counts, [2, 1, 1]);
        let e = ex.vertex("E").unwrap();
        let pick = |b: &DeltaBlock, i: usize| ex.name(b.strategies[i].choice(e).unwrap()).to_owned();
        assert_eq!((pick(&blocks[0], 0), pick(&blocks[0], 1)), ("A".into(), "G".into()));
        assert_eq!(pick(&blocks[1], 0), "F");
        assert_eq!(pick(&blocks[2], 0), "C");
    }

    #[test]
    fn degenerate_lattice() {
        let d = fixtures::gamma_d();
        let run = enumerate(&d, Rational::ZERO).unwrap();
        assert!(run.is_degenerate());
        let u3 = d.vertex("u3").unwrap();
        let v3 = d.vertex("v3").unwrap();
        let t = d.vertex("t").unwrap();
        let arc = |s: VertexId, x: &str| d.find_arc(s, d.vertex(x).unwrap()).unwrap();
        let mut target = EnergyFunction::zero(run.reweighted.cap(), 11);
        target.set(u3, crate::energy::EnergyValue::Finite(2));
        target.set(v3, crate::energy::EnergyValue::Finite(2));
        target.set(t, crate::energy::EnergyValue::Finite(10));
        let id = run.energy.elements.iter().position(|f| *f == target).unwrap();
        let carriers: Vec<Vec<ArcId>> = run
            .subgames
            .nodes
            .iter()
            .filter(|n| n.least_sepm == id)
            .map(|n| n.mask.removed())
            .collect();
        let mut g1 = vec![arc(u3, "t"), arc(t, "v4")];
        let mut g2 = vec![arc(v3, "t"), arc(t, "v4")];
        g1.sort();
        g2.sort();
        assert!(carriers.contains(&g1));
        assert!(carriers.contains(&g2));
        assert_eq!(run.energy.len(), 8);
    }

    #[test]
    fn forced_arena_has_a_single_element() {
        let a = parse_arena("v a 0\nv b 1\ne a b 1\ne b a -1\n").unwrap();
        let run = enumerate(&a, Rational::ZERO).unwrap();
        assert_eq!(run.energy.len(), 1);
        assert_eq!(run.subgames.len(), 1);
        let blocks = decompose(&a, Rational::ZERO, &run.energy, 5).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].count, 1);
    }

    #[test]
    fn rejects_wrong_value() {
        let ex = fixtures::gamma_ex();
        assert!(matches!(
            enumerate(&ex, Rational::ZERO),
            Err(SolveError::NotValued { .. })
        ));
    }

    #[test]
    fn observer_sees_each_item_once() {
        let d = fixtures::gamma_d();
        let mut subgames = Vec::new();
        let mut sepms = Vec::new();
        let run = enumerate_with(&d, Rational::ZERO, &mut |ev| match ev {
            EnumEvent::Subgame { id, .. } => subgames.push(id),
            EnumEvent::Sepm { id, .. } => sepms.push(id),
        })
        .unwrap();
        assert_eq!(subgames, (0..run.subgames.len()).collect::<Vec<_>>());
        assert_eq!(sepms, (0..run.energy.len()).collect::<Vec<_>>());
    }
}
