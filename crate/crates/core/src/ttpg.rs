//! Truncated total-payoff games and the variant where Player 1 may shorten the
//! horizon, whose values converge to the negated least SEPM.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::arena::{Arena, Owner, VertexId};
use crate::energy::{least_sepm, regions_of, EnergyFunction, EnergyValue};
use crate::error::{Result, SolveError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TtpgKind {
    Plain,
    /// Player 1 may cut the remaining number of moves before each move.
    Min,
}

/// Rows `0..=k` of truncated values; `rows[j][v]` is the `j`-step value at `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedValueTable {
    pub kind: TtpgKind,
    pub rows: Vec<Vec<i64>>,
}

impl TruncatedValueTable {
    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, k: usize) -> &[i64] {
        &self.rows[k]
    }

    pub fn to_tsv(&self, arena: &Arena) -> String {
        let mut out = String::from("k");
        for v in arena.vertices() {
            out.push('\t');
            out.push_str(arena.name(v));
        }
        out.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{k}");
            for x in row {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, arena: &Arena) -> Value {
        json!({
            "variant": match self.kind { TtpgKind::Plain => "plain", TtpgKind::Min => "min" },
            "vertices": arena.names(),
            "rows": self.rows,
        })
    }
}

fn best_successor(arena: &Arena, prev: &[i64], u: VertexId) -> Result<i64> {
    let outcomes = arena.out_arcs(u).map(|id| {
        let a = arena.arc(id);
        a.weight
            .checked_add(prev[a.dst])
            .ok_or_else(|| SolveError::Internal("truncated value overflow".into()))
    });
    let mut best: Option<i64> = None;
    for x in outcomes {
        let x = x?;
        best = Some(match (best, arena.owner(u)) {
            (None, _) => x,
            (Some(b), Owner::Zero) => b.max(x),
            (Some(b), Owner::One) => b.min(x),
        });
    }
    Ok(best.expect("no dead ends"))
}

fn next_row(arena: &Arena, prev: &[i64], kind: TtpgKind) -> Result<Vec<i64>> {
    arena
        .vertices()
        .map(|u| {
            let moved = best_successor(arena, prev, u)?;
            Ok(match kind {
                TtpgKind::Plain => moved,
                TtpgKind::Min => prev[u].min(moved),
            })
        })
        .collect()
}

fn table(arena: &Arena, k: usize, kind: TtpgKind) -> Result<TruncatedValueTable> {
    let mut rows = vec![vec![0; arena.vertex_count()]];
    for j in 1..=k {
        let row = next_row(arena, &rows[j - 1], kind)?;
        rows.push(row);
    }
    Ok(TruncatedValueTable { kind, rows })
}

/// `ν_0 = 0`; `ν_k(u)` = max (Player 0) or min (Player 1) of `w(u, v) + ν_{k-1}(v)`.
pub fn plain_ttpg(arena: &Arena, k: usize) -> Result<TruncatedValueTable> {
    table(arena, k, TtpgKind::Plain)
}

/// `ν'_0 = 0`; `ν'_k(u) = min(ν'_{k-1}(u), best successor of w + ν'_{k-1})`.
pub fn min_ttpg(arena: &Arena, k: usize) -> Result<TruncatedValueTable> {
    table(arena, k, TtpgKind::Min)
}

/// The horizon after which the min-variant values agree with `-f*` on Player 0's
/// winning region: `(|V|W - 2W + 1)|W1| + (|W0| - 1)|W0|W + 3`.
pub fn convergence_bound(arena: &Arena, w0: usize, w1: usize) -> i128 {
    let n = arena.vertex_count() as i128;
    let w = arena.max_weight() as i128;
    let w0 = w0 as i128;
    let w1 = w1 as i128;
    (n * w - 2 * w + 1) * w1 + (w0 - 1) * w0 * w + 3
}

#[derive(Clone, Debug)]
pub struct TtpgFixpoint {
    /// `-ν'_k` on the winning region, `⊤` where `ν'_k` fell below `-(|W0| - 1)W`.
    pub energy: EnergyFunction,
    /// First horizon at which the thresholded values equal the least SEPM and
    /// are stationary on the winning region.
    pub k_reached: usize,
    pub k_bound: i128,
    /// The stationary row at `k_reached`.
    pub row: Vec<i64>,
}

/// Iterates the min-variant until its thresholded values reproduce the least
/// SEPM of `arena`, then checks the horizon against [`convergence_bound`].
pub fn min_ttpg_fixpoint(arena: &Arena) -> Result<TtpgFixpoint> {
    let fstar = least_sepm(arena, None);
    let (w0, w1) = regions_of(&fstar);
    let bound = convergence_bound(arena, w0.len(), w1.len());
    let floor = -((w0.len() as i64 - 1) * arena.max_weight());
    let threshold = |row: &[i64]| {
        let values = row
            .iter()
            .map(|&x| {
                if x >= floor {
                    EnergyValue::Finite(-x)
                } else {
                    EnergyValue::Top
                }
            })
            .collect();
        EnergyFunction::new(fstar.cap(), values)
    };
    let mut prev = vec![0i64; arena.vertex_count()];
    let mut k = 0usize;
    loop {
        k += 1;
        if k as i128 > bound {
            return Err(SolveError::Internal(format!(
                "min truncated values did not reach the least SEPM within {bound} steps"
            )));
        }
        let row = next_row(arena, &prev, TtpgKind::Min)?;
        let stationary = w0.iter().all(|&v| row[v] == prev[v]);
        if stationary {
            let energy = threshold(&row);
            if energy == fstar {
                return Ok(TtpgFixpoint {
                    energy,
                    k_reached: k,
                    k_bound: bound,
                    row,
                });
            }
        }
        prev = row;
    }
}

/// Checks a min-variant table row by row against the proven properties:
/// non-increasing columns, `ν' <= 0`, the `[-(|W0|-1)W, 0]` band and
/// `ν' >= -f*` on `W0`, the divergence bound on `W1`, and that whenever the
/// stay-branch is strictly preferred the value is 0.
pub fn audit_min_table(arena: &Arena, table: &TruncatedValueTable) -> std::result::Result<(), String> {
    let fstar = least_sepm(arena, None);
    let (w0, w1) = regions_of(&fstar);
    let w = arena.max_weight();
    let floor = -((w0.len() as i64 - 1) * w);
    let name = |v: VertexId| arena.name(v).to_owned();
    if table.rows[0].iter().any(|&x| x != 0) {
        return Err("row 0 is not zero".into());
    }
    for (k, row) in table.rows.iter().enumerate() {
        for v in arena.vertices() {
            if row[v] > 0 {
                return Err(format!("k={k}: value {} > 0 at {}", row[v], name(v)));
            }
        }
        for &v in &w0 {
            if row[v] < floor {
                return Err(format!("k={k}: value {} below band {floor} at {}", row[v], name(v)));
            }
            let f = fstar.get(v).finite().expect("W0 is finite");
            if row[v] < -f {
                return Err(format!("k={k}: value {} below -f* = {} at {}", row[v], -f, name(v)));
            }
        }
        if !w1.is_empty() {
            let m = w1.len() as i64;
            let limit = -(k as i64 / m) + (m - 1) * w;
            for &v in &w1 {
                if row[v] > limit {
                    return Err(format!("k={k}: value {} above divergence bound {limit} at {}", row[v], name(v)));
                }
            }
        }
        if k == 0 {
            continue;
        }
        let prev = &table.rows[k - 1];
        for u in arena.vertices() {
            if row[u] > prev[u] {
                return Err(format!("k={k}: column of {} increased", name(u)));
            }
            let moved = best_successor(arena, prev, u).map_err(|e| e.to_string())?;
            if prev[u] < moved && row[u] != 0 {
                return Err(format!("k={k}: stay-branch preferred at {} but value {}", name(u), row[u]));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{parse_arena, reweight};
    use crate::fixtures;
    use crate::oracle::{brute_force_min_truncated, brute_force_truncated};
    use crate::rational::Rational;

    #[test]
    fn zero_horizon() {
        let a = fixtures::gamma_ex();
        assert_eq!(plain_ttpg(&a, 0).unwrap().rows, [vec![0; 7]]);
        assert_eq!(min_ttpg(&a, 0).unwrap().rows, [vec![0; 7]]);
    }

    #[test]
    fn self_loops() {
        let a = parse_arena("v x 1\ne x x 3\n").unwrap();
        let t = plain_ttpg(&a, 4).unwrap();
        assert_eq!(t.rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [0, 3, 6, 9, 12]);
        let b = parse_arena("v x 0\ne x x -1\n").unwrap();
        let t = min_ttpg(&b, 5).unwrap();
        assert_eq!(t.rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [0, -1, -2, -3, -4, -5]);
        audit_min_table(&b, &t).unwrap();
    }

    #[test]
    fn plain_matches_game_tree_on_non_positional_arena() {
        let a = fixtures::not_positional();
        assert_eq!(plain_ttpg(&a, 6).unwrap().rows, brute_force_truncated(&a, 6));
        assert_eq!(min_ttpg(&a, 6).unwrap().rows, brute_force_min_truncated(&a, 6));
    }

    #[test]
    fn min_variant_converges_on_shifted_example() {
        let a = reweight(&fixtures::gamma_ex(), Rational::from_integer(-1)).unwrap();
        let fix = min_ttpg_fixpoint(&a).unwrap();
        assert_eq!(fix.row, [0, -4, -8, -4, 0, -4, 0]);
        assert_eq!(fix.energy, least_sepm(&a, None));
        assert_eq!(fix.k_bound, 6 * 7 * 4 + 3);
        assert!(fix.k_reached as i128 <= fix.k_bound);
        let table = min_ttpg(&a, fix.k_bound as usize).unwrap();
        audit_min_table(&a, &table).unwrap();
        assert_eq!(table.rows.last().unwrap(), &fix.row);
    }

    #[test]
    fn zero_loop_fixpoint() {
        let a = parse_arena("v x 0\ne x x 0\n").unwrap();
        let fix = min_ttpg_fixpoint(&a).unwrap();
        assert_eq!(fix.k_reached, 1);
        assert_eq!(fix.energy, EnergyFunction::zero(0, 1));
    }

    #[test]
    fn tsv_layout() {
        let a = parse_arena("v x 0\nv y 1\ne x y 1\ne y x -1\n").unwrap();
        let tsv = plain_ttpg(&a, 1).unwrap().to_tsv(&a);
        assert_eq!(tsv, "k\tx\ty\n0\t0\t0\n1\t1\t-1\n");
    }
}
