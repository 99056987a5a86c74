//! Mean-payoff values, the partition into value classes, and optimal strategy
//! synthesis from least progress measures of the reweighted classes.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::arena::{reweight, Arena, Owner, VertexId};
use crate::energy::{compatible_arcs, least_sepm, EnergyFunction};
use crate::error::{Result, SolveError};
use crate::oracle::min_cycle_mean_reachable;
use crate::potentials::{is_conservative, restrict, PositionalStrategy};
use crate::rational::Rational;

/// One exact value per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueAssignment {
    values: Vec<Rational>,
}

impl ValueAssignment {
    pub fn new(values: Vec<Rational>) -> Self {
        ValueAssignment { values }
    }

    pub fn get(&self, v: VertexId) -> Rational {
        self.values[v]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn to_json(&self, arena: &Arena) -> Value {
        let mut values = Map::new();
        for v in arena.vertices() {
            let r = self.values[v];
            values.insert(arena.name(v).to_owned(), json!({ "num": r.num(), "den": r.den() }));
        }
        json!({ "values": values })
    }
}

/// A set of vertices sharing the value `nu`, with the subgame they induce.
#[derive(Clone, Debug)]
pub struct ValueClass {
    pub nu: Rational,
    /// Global vertex ids; position `i` is vertex `i` of `subgame`.
    pub vertices: Vec<VertexId>,
    pub subgame: Arena,
}

#[derive(Clone, Debug)]
pub struct ErgodicPartition {
    pub classes: Vec<ValueClass>,
}

/// Sign tests of `val(v) - m` for every vertex at once.
struct Prober<'a> {
    arena: &'a Arena,
    dual: Arena,
}

impl Prober<'_> {
    /// `val(v) >= m`: Player 0 wins the energy game on `w - m` from `v`.
    fn at_least(&self, m: Rational) -> Result<Vec<bool>> {
        winning_mask(self.arena, m)
    }

    /// `val(v) > m`: Player 1 loses the dual energy game on `-w + m`.
    fn above(&self, m: Rational) -> Result<Vec<bool>> {
        Ok(winning_mask(&self.dual, m.neg())?
            .into_iter()
            .map(|w| !w)
            .collect())
    }
}

fn winning_mask(arena: &Arena, m: Rational) -> Result<Vec<bool>> {
    let shifted = reweight(arena, m)?;
    let f = least_sepm(&shifted, None);
    Ok(f.values().iter().map(|x| !x.is_top()).collect())
}

enum Search {
    /// `val ∈ [lo, hi]`, integers.
    Integer { lo: i64, hi: i64 },
    /// `floor(val) = z`, unknown whether `val = z`.
    Floor(i64),
    /// `left < val < right`, adjacent in the Stern-Brocot tree.
    Fraction { left: Rational, right: Rational },
}

struct Group {
    vertices: Vec<VertexId>,
    search: Search,
}

#[derive(Default)]
struct Step {
    next: Vec<Group>,
    resolved: Vec<(Vec<VertexId>, Rational)>,
}

impl Step {
    fn push(&mut self, vertices: Vec<VertexId>, search: Search) {
        if !vertices.is_empty() {
            self.next.push(Group { vertices, search });
        }
    }

    fn resolve(&mut self, vertices: Vec<VertexId>, value: Rational) {
        if !vertices.is_empty() {
            self.resolved.push((vertices, value));
        }
    }
}

/// Exact values of every vertex.
///
/// All vertices start in one group. Each group first bisects the integer range
/// `[-W, W]` for `floor(val)`, then descends the Stern-Brocot tree between
/// `floor` and `floor + 1`; every probe is one energy-game solve shared by the
/// whole group, and groups split as their vertices' answers diverge.
pub fn solve_values(arena: &Arena) -> Result<ValueAssignment> {
    solve_values_with(arena, false)
}

pub fn solve_values_with(arena: &Arena, parallel: bool) -> Result<ValueAssignment> {
    let prober = Prober {
        arena,
        dual: arena.dual()?,
    };
    let n = arena.vertex_count() as i64;
    let w = arena.max_weight();
    let mut values = vec![None; arena.vertex_count()];
    let mut groups = vec![Group {
        vertices: arena.vertices().collect(),
        search: Search::Integer { lo: -w, hi: w },
    }];
    while !groups.is_empty() {
        let steps: Vec<Result<Step>> = if parallel {
            groups.into_par_iter().map(|g| advance(&prober, g, n)).collect()
        } else {
            groups.into_iter().map(|g| advance(&prober, g, n)).collect()
        };
        groups = Vec::new();
        for step in steps {
            let step = step?;
            groups.extend(step.next);
            for (vs, r) in step.resolved {
                for v in vs {
                    values[v] = Some(r);
                }
            }
        }
    }
    Ok(ValueAssignment::new(
        values.into_iter().map(|v| v.expect("every vertex resolved")).collect(),
    ))
}

fn split(vertices: Vec<VertexId>, test: &[bool]) -> (Vec<VertexId>, Vec<VertexId>) {
    vertices.into_iter().partition(|&v| test[v])
}

fn advance(prober: &Prober<'_>, group: Group, n: i64) -> Result<Step> {
    let Group { vertices, search } = group;
    let mut step = Step::default();
    match search {
        Search::Integer { lo, hi } if lo == hi => step.push(vertices, Search::Floor(lo)),
        Search::Integer { lo, hi } => {
            let mid = lo + (hi - lo + 1) / 2;
            let (up, down) = split(vertices, &prober.at_least(Rational::from_integer(mid))?);
            step.push(up, Search::Integer { lo: mid, hi });
            step.push(down, Search::Integer { lo, hi: mid - 1 });
        }
        Search::Floor(z) => {
            let (above, exact) = split(vertices, &prober.above(Rational::from_integer(z))?);
            step.resolve(exact, Rational::from_integer(z));
            step.push(
                above,
                Search::Fraction {
                    left: Rational::from_integer(z),
                    right: Rational::from_integer(z + 1),
                },
            );
        }
        Search::Fraction { left, right } => {
            let m = left.mediant(&right);
            if m.den() > n {
                return Err(SolveError::Internal(format!(
                    "value search passed denominator {} > |V| between {left} and {right}",
                    m.den()
                )));
            }
            let ge = prober.at_least(m)?;
            let gt = prober.above(m)?;
            let mut hit = Vec::new();
            let mut higher = Vec::new();
            let mut lower = Vec::new();
            for v in vertices {
                match (ge[v], gt[v]) {
                    (_, true) => higher.push(v),
                    (true, false) => hit.push(v),
                    (false, _) => lower.push(v),
                }
            }
            step.resolve(hit, m);
            step.push(higher, Search::Fraction { left: m, right });
            step.push(lower, Search::Fraction { left, right: m });
        }
    }
    Ok(step)
}

/// Groups vertices by value (ascending) and extracts the subgame each class induces.
pub fn ergodic_partition(arena: &Arena, vals: &ValueAssignment) -> Result<ErgodicPartition> {
    let mut nus: Vec<Rational> = vals.values().to_vec();
    nus.sort();
    nus.dedup();
    let mut classes = Vec::with_capacity(nus.len());
    for nu in nus {
        let vertices: Vec<VertexId> = arena.vertices().filter(|&v| vals.get(v) == nu).collect();
        let subgame = arena.induced(&vertices).map_err(|e| {
            SolveError::Internal(format!("value class {nu} does not induce a subgame: {e}"))
        })?;
        classes.push(ValueClass {
            nu,
            vertices,
            subgame,
        });
    }
    Ok(ErgodicPartition { classes })
}

/// A value class with its reweighted subgame and that subgame's least SEPM.
#[derive(Clone, Debug)]
pub struct ClassSolution {
    pub class: ValueClass,
    pub reweighted: Arena,
    pub least_sepm: EnergyFunction,
}

pub fn solve_classes(arena: &Arena, vals: &ValueAssignment) -> Result<Vec<ClassSolution>> {
    ergodic_partition(arena, vals)?
        .classes
        .into_iter()
        .map(|class| {
            let reweighted = reweight(&class.subgame, class.nu)?;
            let f = least_sepm(&reweighted, None);
            if let Some(v) = f.values().iter().position(|x| x.is_top()) {
                return Err(SolveError::NotValued {
                    nu: class.nu.to_string(),
                    vertex: class.subgame.name(v).to_owned(),
                });
            }
            Ok(ClassSolution {
                class,
                reweighted,
                least_sepm: f,
            })
        })
        .collect()
}

/// An optimal positional strategy: within each value class, the first arc (in
/// canonical order) compatible with the class's least SEPM of `w - ν`.
pub fn synthesize_optimal(arena: &Arena, vals: &ValueAssignment) -> Result<PositionalStrategy> {
    let solutions = solve_classes(arena, vals)?;
    Ok(strategy_from_classes(arena, &solutions))
}

pub fn strategy_from_classes(arena: &Arena, solutions: &[ClassSolution]) -> PositionalStrategy {
    let mut choice = vec![None; arena.vertex_count()];
    for sol in solutions {
        let sub = &sol.reweighted;
        for u in sub.player_vertices(Owner::Zero) {
            let first = compatible_arcs(sub, &sol.least_sepm, u)[0];
            choice[sol.class.vertices[u]] = Some(sol.class.vertices[sub.arc(first).dst]);
        }
    }
    PositionalStrategy::new(choice)
}

/// Whether `strategy` secures `vals` from every vertex.
///
/// Requires both that each class's reweighted strategy graph is conservative
/// with the strategy never leaving its class, and that the minimum reachable
/// cycle mean under the strategy equals the value everywhere.
pub fn is_optimal(
    arena: &Arena,
    vals: &ValueAssignment,
    strategy: &PositionalStrategy,
) -> Result<bool> {
    strategy.validate(arena)?;
    for class in ergodic_partition(arena, vals)?.classes {
        let mut local = vec![usize::MAX; arena.vertex_count()];
        for (i, &v) in class.vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut choice = vec![None; class.vertices.len()];
        for (i, &v) in class.vertices.iter().enumerate() {
            if let Some(t) = strategy.choice(v) {
                if local[t] == usize::MAX {
                    return Ok(false);
                }
                choice[i] = Some(local[t]);
            }
        }
        let reweighted = reweight(&class.subgame, class.nu)?;
        let graph = restrict(&reweighted, &PositionalStrategy::new(choice))?;
        if !is_conservative(&graph) {
            return Ok(false);
        }
    }
    let graph = restrict(arena, strategy)?;
    Ok(arena
        .vertices()
        .all(|v| min_cycle_mean_reachable(&graph, v) == vals.get(v)))
}
