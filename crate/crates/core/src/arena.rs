//! Weighted two-player game graphs, their text format, reweighting and subgames.
//!
//! Vertices are indexed in declaration order. Arcs are kept sorted by
//! `(src, dst)` vertex index; an arc's position in that order is its *arc index*,
//! which every other module uses to name arcs.

use std::collections::HashMap;
use std::fmt::Write as _;

use bitvec::vec::BitVec;
use serde::{Deserialize, Serialize};

use crate::error::ArenaError;
use crate::rational::Rational;

pub type VertexId = usize;
pub type ArcId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Owner {
    /// The maximizer.
    Zero,
    /// The minimizer.
    One,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Zero => Owner::One,
            Owner::One => Owner::Zero,
        }
    }

    fn token(self) -> char {
        match self {
            Owner::Zero => '0',
            Owner::One => '1',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: i64,
}

/// A finite arena `(V, E, w, <V0, V1>)` without dead ends.
///
/// `scale` records the denominator accumulated by [`reweight`]: energy levels
/// computed on a reweighted arena are expressed in units of `1/scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arena {
    names: Vec<String>,
    owners: Vec<Owner>,
    arcs: Vec<Arc>,
    out_start: Vec<usize>,
    in_arcs: Vec<Vec<ArcId>>,
    index: HashMap<String, VertexId>,
    max_weight: i64,
    cap: i64,
    scale: i64,
}

impl Arena {
    /// Validates and builds an arena. Arcs may be given in any order.
    pub fn new(
        vertices: Vec<(String, Owner)>,
        arcs: impl IntoIterator<Item = Arc>,
    ) -> Result<Self, ArenaError> {
        Self::with_scale(vertices, arcs, 1)
    }

    fn with_scale(
        vertices: Vec<(String, Owner)>,
        arcs: impl IntoIterator<Item = Arc>,
        scale: i64,
    ) -> Result<Self, ArenaError> {
        if vertices.is_empty() {
            return Err(ArenaError::Empty);
        }
        let mut index = HashMap::with_capacity(vertices.len());
        let mut names = Vec::with_capacity(vertices.len());
        let mut owners = Vec::with_capacity(vertices.len());
        for (i, (name, owner)) in vertices.into_iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(ArenaError::DuplicateVertex {
                    line: 0,
                    vertex: name,
                });
            }
            names.push(name);
            owners.push(owner);
        }
        let n = names.len();
        let mut arcs: Vec<Arc> = arcs.into_iter().collect();
        for a in &arcs {
            if a.src >= n || a.dst >= n {
                return Err(ArenaError::UnknownEndpoint {
                    line: 0,
                    vertex: format!("#{}", a.src.max(a.dst)),
                });
            }
        }
        arcs.sort_by_key(|a| (a.src, a.dst));
        for pair in arcs.windows(2) {
            if (pair[0].src, pair[0].dst) == (pair[1].src, pair[1].dst) {
                return Err(ArenaError::DuplicateArc {
                    line: 0,
                    src: names[pair[0].src].clone(),
                    dst: names[pair[0].dst].clone(),
                });
            }
        }
        let mut out_start = vec![0; n + 1];
        let mut in_arcs = vec![Vec::new(); n];
        for (id, a) in arcs.iter().enumerate() {
            out_start[a.src + 1] += 1;
            in_arcs[a.dst].push(id);
        }
        for v in 0..n {
            out_start[v + 1] += out_start[v];
            if out_start[v + 1] == out_start[v] {
                return Err(ArenaError::DeadEnd(names[v].clone()));
            }
        }
        let mut max_weight = 0i64;
        for a in &arcs {
            let abs = a
                .weight
                .checked_abs()
                .ok_or(ArenaError::Overflow("taking |w|"))?;
            max_weight = max_weight.max(abs);
        }
        let cap = (n as i64 - 1)
            .checked_mul(max_weight)
            .ok_or(ArenaError::Overflow("computing the energy cap"))?;
        Ok(Arena {
            names,
            owners,
            arcs,
            out_start,
            in_arcs,
            index,
            max_weight,
            cap,
            scale,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.names.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }

    pub fn owner(&self, v: VertexId) -> Owner {
        self.owners[v]
    }

    pub fn player_vertices(&self, owner: Owner) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.owners[v] == owner)
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Arc indices leaving `v`, in canonical order.
    pub fn out_arcs(&self, v: VertexId) -> std::ops::Range<ArcId> {
        self.out_start[v]..self.out_start[v + 1]
    }

    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_arcs[v]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_start[v + 1] - self.out_start[v]
    }

    pub fn find_arc(&self, src: VertexId, dst: VertexId) -> Option<ArcId> {
        let range = self.out_arcs(src);
        let offset = self.arcs[range.clone()]
            .binary_search_by_key(&dst, |a| a.dst)
            .ok()?;
        Some(range.start + offset)
    }

    /// `W`: the largest absolute arc weight.
    pub fn max_weight(&self) -> i64 {
        self.max_weight
    }

    /// Energy cap `K = (|V| - 1) * W`. Finite least-SEPM values never exceed it.
    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// The same graph with owners swapped and weights negated. Its values are the
    /// negated values of `self`.
    pub fn dual(&self) -> Result<Arena, ArenaError> {
        let vertices = self.vertex_list(|o| o.opponent());
        let arcs = self
            .arcs
            .iter()
            .map(|a| {
                a.weight
                    .checked_neg()
                    .map(|weight| Arc { weight, ..*a })
                    .ok_or(ArenaError::Overflow("negating weights"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Arena::with_scale(vertices, arcs, self.scale)
    }

    /// The subgame induced by `keep` (arcs with both endpoints kept), listed in the
    /// given order.
    pub fn induced(&self, keep: &[VertexId]) -> Result<Arena, ArenaError> {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            local[v] = i;
        }
        let vertices = keep
            .iter()
            .map(|&v| (self.names[v].clone(), self.owners[v]))
            .collect();
        let arcs = self
            .arcs
            .iter()
            .filter(|a| local[a.src] != usize::MAX && local[a.dst] != usize::MAX)
            .map(|a| Arc {
                src: local[a.src],
                dst: local[a.dst],
                weight: a.weight,
            });
        Arena::with_scale(vertices, arcs.collect::<Vec<_>>(), self.scale)
    }

    fn vertex_list(&self, owner: impl Fn(Owner) -> Owner) -> Vec<(String, Owner)> {
        self.names
            .iter()
            .cloned()
            .zip(self.owners.iter().map(|&o| owner(o)))
            .collect()
    }

    /// Graphviz rendering, for inspection only.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph arena {\n");
        for v in self.vertices() {
            let shape = match self.owners[v] {
                Owner::Zero => "circle",
                Owner::One => "box",
            };
            let _ = writeln!(out, "  {} [shape={}];", self.names[v], shape);
        }
        for a in &self.arcs {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{}\"];",
                self.names[a.src], self.names[a.dst], a.weight
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Read-only view of an arena restricted to a subset of its arcs.
///
/// Algorithms over game graphs take `&impl GameGraph` so they run unchanged on a
/// full arena, a subgame, or a strategy-restricted graph.
pub trait GameGraph {
    fn arena(&self) -> &Arena;

    fn retains(&self, arc: ArcId) -> bool;

    fn vertex_count(&self) -> usize {
        self.arena().vertex_count()
    }

    fn owner(&self, v: VertexId) -> Owner {
        self.arena().owner(v)
    }

    fn successors(&self, v: VertexId) -> impl Iterator<Item = (ArcId, &Arc)> {
        let arena = self.arena();
        arena
            .out_arcs(v)
            .filter(|&id| self.retains(id))
            .map(move |id| (id, arena.arc(id)))
    }

    fn predecessors(&self, v: VertexId) -> impl Iterator<Item = (ArcId, &Arc)> {
        let arena = self.arena();
        arena
            .in_arcs(v)
            .iter()
            .copied()
            .filter(|&id| self.retains(id))
            .map(move |id| (id, arena.arc(id)))
    }

    fn retained_arcs(&self) -> impl Iterator<Item = (ArcId, &Arc)> {
        let arena = self.arena();
        (0..arena.arc_count())
            .filter(|&id| self.retains(id))
            .map(move |id| (id, arena.arc(id)))
    }
}

impl GameGraph for Arena {
    fn arena(&self) -> &Arena {
        self
    }

    fn retains(&self, _arc: ArcId) -> bool {
        true
    }
}

/// An arena together with a set of retained arcs.
#[derive(Clone, Debug)]
pub struct SubArena<'a> {
    arena: &'a Arena,
    retained: BitVec,
}

impl<'a> SubArena<'a> {
    pub fn new(arena: &'a Arena, retained: BitVec) -> Self {
        debug_assert_eq!(retained.len(), arena.arc_count());
        SubArena { arena, retained }
    }

    pub fn retained(&self) -> &BitVec {
        &self.retained
    }
}

impl GameGraph for SubArena<'_> {
    fn arena(&self) -> &Arena {
        self.arena
    }

    fn retains(&self, arc: ArcId) -> bool {
        self.retained[arc]
    }
}

/// Which Player-0 arcs a subgame keeps. Player-1 arcs are always kept.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubgameMask {
    retained: BitVec,
}

impl SubgameMask {
    pub fn full(arena: &Arena) -> Self {
        SubgameMask {
            retained: BitVec::repeat(true, arena.arc_count()),
        }
    }

    /// Builds a mask from per-arc retention flags, checking it against `arena`.
    pub fn from_retained(arena: &Arena, retained: BitVec) -> Result<Self, ArenaError> {
        let mask = SubgameMask { retained };
        mask.validate(arena)?;
        Ok(mask)
    }

    /// The full mask minus the listed arcs.
    pub fn without(arena: &Arena, removed: &[ArcId]) -> Result<Self, ArenaError> {
        let mut retained = BitVec::repeat(true, arena.arc_count());
        for &id in removed {
            if id >= arena.arc_count() {
                return Err(ArenaError::MaskMismatch(format!("arc index {id} out of range")));
            }
            retained.set(id, false);
        }
        Self::from_retained(arena, retained)
    }

    pub fn validate(&self, arena: &Arena) -> Result<(), ArenaError> {
        if self.retained.len() != arena.arc_count() {
            return Err(ArenaError::MaskMismatch(format!(
                "{} flags for {} arcs",
                self.retained.len(),
                arena.arc_count()
            )));
        }
        for v in arena.vertices() {
            let kept = arena.out_arcs(v).filter(|&id| self.retained[id]).count();
            match arena.owner(v) {
                Owner::One if kept != arena.out_degree(v) => {
                    return Err(ArenaError::MaskMismatch(format!(
                        "Player-1 vertex `{}` lost an arc",
                        arena.name(v)
                    )));
                }
                Owner::Zero if kept == 0 => {
                    return Err(ArenaError::EmptyMask(arena.name(v).to_owned()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn retains(&self, arc: ArcId) -> bool {
        self.retained[arc]
    }

    pub fn retained(&self) -> &BitVec {
        &self.retained
    }

    /// Arc indices dropped relative to the full arena, ascending.
    pub fn removed(&self) -> Vec<ArcId> {
        self.retained.iter_zeros().collect()
    }

    /// Replaces the out-arcs of `u` with `keep`.
    pub fn restrict_vertex(&self, arena: &Arena, u: VertexId, keep: &[ArcId]) -> SubgameMask {
        let mut retained = self.retained.clone();
        for id in arena.out_arcs(u) {
            retained.set(id, false);
        }
        for &id in keep {
            retained.set(id, true);
        }
        SubgameMask { retained }
    }

    pub fn view<'a>(&self, arena: &'a Arena) -> SubArena<'a> {
        SubArena::new(arena, self.retained.clone())
    }

    /// True if every arc kept by `self` is kept by `other`.
    pub fn is_subset_of(&self, other: &SubgameMask) -> bool {
        self.retained.iter_ones().all(|id| other.retained[id])
    }
}

/// Multiplies every weight by `nu.den()` and subtracts `nu.num()`, giving the
/// integer-scaled form of `w - nu`.
pub fn reweight(arena: &Arena, nu: Rational) -> Result<Arena, ArenaError> {
    let (num, den) = (nu.num(), nu.den());
    let arcs = arena
        .arcs
        .iter()
        .map(|a| {
            a.weight
                .checked_mul(den)
                .and_then(|w| w.checked_sub(num))
                .map(|weight| Arc { weight, ..*a })
                .ok_or(ArenaError::Overflow("reweighting"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scale = arena
        .scale
        .checked_mul(den)
        .ok_or(ArenaError::Overflow("scaling"))?;
    Arena::with_scale(arena.vertex_list(|o| o), arcs, scale)
}

/// Materializes the subgame selected by `mask`. The vertex set is unchanged.
pub fn apply_mask(arena: &Arena, mask: &SubgameMask) -> Result<Arena, ArenaError> {
    mask.validate(arena)?;
    let arcs: Vec<Arc> = arena
        .arcs
        .iter()
        .enumerate()
        .filter(|(id, _)| mask.retains(*id))
        .map(|(_, a)| *a)
        .collect();
    Arena::with_scale(arena.vertex_list(|o| o), arcs, arena.scale)
}

fn is_ident(token: &str) -> bool {
    !token.is_empty()
        && token
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Parses the line-based arena format:
///
/// ```text
/// # comment
/// v <id> <0|1>
/// e <src> <dst> <weight>
/// ```
pub fn parse_arena(text: &str) -> Result<Arena, ArenaError> {
    let mut vertices: Vec<(String, Owner)> = Vec::new();
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut arcs: Vec<Arc> = Vec::new();
    let mut seen: HashMap<(VertexId, VertexId), usize> = HashMap::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<(usize, &str)> = line
            .split_ascii_whitespace()
            .map(|tok| (tok.as_ptr() as usize - line.as_ptr() as usize + 1, tok))
            .collect();
        let syntax = |column: usize, message: String| ArenaError::Syntax {
            line: lineno,
            column,
            message,
        };
        let (col0, kind) = tokens[0];
        match kind {
            "v" => {
                if tokens.len() != 3 {
                    return Err(syntax(col0, format!("expected `v <id> <0|1>`, got {} fields", tokens.len())));
                }
                let (col, id) = tokens[1];
                if !is_ident(id) {
                    return Err(syntax(col, format!("invalid vertex id `{id}`")));
                }
                let owner = match tokens[2] {
                    (_, "0") => Owner::Zero,
                    (_, "1") => Owner::One,
                    (col, other) => return Err(syntax(col, format!("owner must be 0 or 1, got `{other}`"))),
                };
                if index.contains_key(id) {
                    return Err(ArenaError::DuplicateVertex {
                        line: lineno,
                        vertex: id.to_owned(),
                    });
                }
                index.insert(id.to_owned(), vertices.len());
                vertices.push((id.to_owned(), owner));
            }
            "e" => {
                if tokens.len() != 4 {
                    return Err(syntax(col0, format!("expected `e <src> <dst> <weight>`, got {} fields", tokens.len())));
                }
                let mut ends = [0usize; 2];
                for (slot, &(col, id)) in ends.iter_mut().zip(&tokens[1..3]) {
                    if !is_ident(id) {
                        return Err(syntax(col, format!("invalid vertex id `{id}`")));
                    }
                    *slot = *index.get(id).ok_or_else(|| ArenaError::UnknownEndpoint {
                        line: lineno,
                        vertex: id.to_owned(),
                    })?;
                }
                let (col, w) = tokens[3];
                let weight: i64 = w
                    .parse()
                    .map_err(|_| syntax(col, format!("invalid integer weight `{w}`")))?;
                if seen.insert((ends[0], ends[1]), lineno).is_some() {
                    return Err(ArenaError::DuplicateArc {
                        line: lineno,
                        src: tokens[1].1.to_owned(),
                        dst: tokens[2].1.to_owned(),
                    });
                }
                arcs.push(Arc {
                    src: ends[0],
                    dst: ends[1],
                    weight,
                });
            }
            other => return Err(syntax(col0, format!("unknown directive `{other}`"))),
        }
    }
    Arena::new(vertices, arcs)
}

/// Canonical text form: a header comment, `v` lines in declaration order, then
/// `e` lines in arc-index order.
pub fn serialize_arena(arena: &Arena) -> String {
    let mut out = format!(
        "# mpg arena: {} vertices, {} arcs\n",
        arena.vertex_count(),
        arena.arc_count()
    );
    for v in arena.vertices() {
        let _ = writeln!(out, "v {} {}", arena.names[v], arena.owners[v].token());
    }
    for a in &arena.arcs {
        let _ = writeln!(
            out,
            "e {} {} {}",
            arena.names[a.src], arena.names[a.dst], a.weight
        );
    }
    out
}
