//! Differential checks of the solver against the exhaustive oracle on one arena.

use std::collections::HashSet;
use std::fmt;

use crate::arena::{parse_arena, reweight, serialize_arena, Arena};
use crate::energy::{is_sepm, least_sepm, least_sepm_capped, EnergyFunction};
use crate::error::Result;
use crate::lattice::{decompose, enumerate, enumeration_json, DeltaBlock, Enumeration};
use crate::oracle::{
    exhaustive_opt_with, naive_least_fp, naive_least_sepm, reference_decomposition, ExhaustiveOpt,
};
use crate::potentials::{is_conservative, least_feasible_potential, restrict, PositionalStrategy};
use crate::ttpg::{audit_min_table, min_ttpg, min_ttpg_fixpoint};
use crate::values::{is_optimal, solve_classes, solve_values_with, strategy_from_classes};

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Largest strategy product the oracle may enumerate.
    pub max_strategies: u128,
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_strategies: crate::oracle::DEFAULT_STRATEGY_BOUND,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    /// `None` on success, otherwise what went wrong.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Some value class has more basic subgames than extremal SEPMs.
    pub degenerate: bool,
    pub classes: usize,
    pub extremal_sepms: usize,
    pub basic_subgames: usize,
    pub recursion_edges: usize,
    pub ttpg_steps: Vec<(usize, i128)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failure.is_none())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.failure.is_some())
    }

    /// Whether every check with this name passed (vacuously true if none ran).
    pub fn passed_check(&self, name: &str) -> bool {
        self.checks.iter().filter(|c| c.name == name).all(|c| c.failure.is_none())
    }

    fn record(&mut self, name: &'static str, result: std::result::Result<(), String>) {
        self.checks.push(Check {
            name,
            failure: result.err(),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.failure {
                None => writeln!(f, "ok    {}", c.name)?,
                Some(why) => writeln!(f, "FAIL  {}: {why}", c.name)?,
            }
        }
        Ok(())
    }
}

pub const ROUND_TRIP: &str = "round-trip";
pub const VALUES: &str = "values";
pub const SYNTHESIS: &str = "synthesis";
pub const ERGODIC: &str = "ergodic-product";
pub const OPT_CONSERVATIVE: &str = "opt-iff-conservative";
pub const LATTICE: &str = "energy-lattice";
pub const DECOMPOSITION: &str = "decomposition";
pub const SEPM_ORDER: &str = "sepm-order";
pub const WORKLIST: &str = "worklist-vs-naive";
pub const POTENTIAL: &str = "potential-vs-naive";
pub const SEEDED: &str = "seeded-vs-unseeded";
pub const STORE: &str = "store-audit";
pub const DETERMINISM: &str = "deterministic-output";
pub const TTPG: &str = "min-ttpg";

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sorted<T: Ord + Clone>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort();
    v
}

/// Runs the whole battery on `arena`. `Err` only when the oracle cannot run
/// (bound exceeded) or an arena transformation overflows.
pub fn verify_arena(arena: &Arena, opts: VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();

    let text = serialize_arena(arena);
    report.record(
        ROUND_TRIP,
        match parse_arena(&text) {
            Ok(back) => ensure(serialize_arena(&back) == text && back.arcs() == arena.arcs(), || {
                "serialized arena reparses differently".into()
            }),
            Err(e) => Err(format!("serialized arena does not parse: {e}")),
        },
    );

    let cap = arena.cap();
    let fast = least_sepm(arena, None);
    let slow = naive_least_sepm(arena, cap);
    report.record(
        WORKLIST,
        ensure(fast == slow, || format!("worklist {} vs naive {}", fast.render(arena), slow.render(arena))),
    );

    let truth = exhaustive_opt_with(arena, opts.max_strategies, opts.parallel)?;
    let vals = solve_values_with(arena, opts.parallel)?;
    report.record(
        VALUES,
        ensure(vals == truth.values, || {
            arena
                .vertices()
                .find(|&v| vals.get(v) != truth.values.get(v))
                .map(|v| format!("{}: solver {} vs oracle {}", arena.name(v), vals.get(v), truth.values.get(v)))
                .unwrap_or_default()
        }),
    );
    if vals != truth.values {
        return Ok(report);
    }

    let solutions = solve_classes(arena, &vals)?;
    report.classes = solutions.len();
    let synthesized = strategy_from_classes(arena, &solutions);
    report.record(
        SYNTHESIS,
        ensure(truth.opt.contains(&synthesized) && is_optimal(arena, &vals, &synthesized)?, || {
            format!("synthesized {} is not optimal", synthesized.render(arena))
        }),
    );

    let opt_set: HashSet<&PositionalStrategy> = truth.opt.iter().collect();
    let mut class_opt_product: u128 = 1;
    for sol in &solutions {
        let class = &sol.class;
        let sub = &class.subgame;
        let local = exhaustive_opt_with(sub, opts.max_strategies, opts.parallel)?;
        class_opt_product = class_opt_product.saturating_mul(local.opt.len() as u128);

        check_opt_iff_conservative(&mut report, sub, &sol.reweighted, &local)?;
        check_lattice(&mut report, sub, class.nu, &sol.reweighted, &local)?;

        match audit_convergence(&sol.reweighted)? {
            Ok(steps) => {
                report.ttpg_steps.push(steps);
                report.record(TTPG, Ok(()));
            }
            Err(e) => report.record(TTPG, Err(e)),
        }
    }
    let whole: u128 = truth.opt.len() as u128;
    let mut ergodic = ensure(whole == class_opt_product, || {
        format!("|opt| = {whole} but product of class opt sets = {class_opt_product}")
    });
    if ergodic.is_ok() {
        for s in &truth.opt {
            if !is_optimal(arena, &vals, s)? {
                ergodic = Err(format!("oracle-optimal {} rejected by is_optimal", s.render(arena)));
                break;
            }
        }
    }
    if ergodic.is_ok() {
        for s in crate::oracle::all_strategies(arena) {
            if !opt_set.contains(&s) && is_optimal(arena, &vals, &s)? {
                ergodic = Err(format!("non-optimal {} accepted by is_optimal", s.render(arena)));
                break;
            }
        }
    }
    report.record(ERGODIC, ergodic);
    Ok(report)
}

fn check_opt_iff_conservative(
    report: &mut VerifyReport,
    sub: &Arena,
    reweighted: &Arena,
    local: &ExhaustiveOpt,
) -> Result<()> {
    let opt: HashSet<&PositionalStrategy> = local.opt.iter().collect();
    let mut result = Ok(());
    for s in crate::oracle::all_strategies(sub) {
        let conservative = is_conservative(&restrict(reweighted, &s)?);
        if conservative != opt.contains(&s) {
            result = Err(format!(
                "{}: optimal={} conservative={conservative}",
                s.render(sub),
                opt.contains(&s)
            ));
            break;
        }
    }
    report.record(OPT_CONSERVATIVE, result);
    Ok(())
}

fn check_lattice(
    report: &mut VerifyReport,
    sub: &Arena,
    nu: crate::rational::Rational,
    reweighted: &Arena,
    local: &ExhaustiveOpt,
) -> Result<()> {
    let run = enumerate(sub, nu)?;
    report.extremal_sepms += run.energy.len();
    report.basic_subgames += run.subgames.len();
    report.degenerate |= run.is_degenerate();

    let reference = reference_decomposition(sub, nu, &local.opt)?;
    let ref_set: HashSet<&EnergyFunction> = reference.iter().map(|(f, _)| f).collect();
    let got_set: HashSet<&EnergyFunction> = run.energy.elements.iter().collect();
    report.record(
        LATTICE,
        ensure(ref_set == got_set && got_set.len() == run.energy.len(), || {
            format!(
                "enumerated {} functions, reference has {}",
                run.energy.len(),
                reference.len()
            )
        }),
    );

    let mut order = Ok(());
    let least = run.energy.least();
    for f in &run.energy.elements {
        if !is_sepm(reweighted, f) || !least.le(f) {
            order = Err(format!("{} is not an SEPM above the least", f.render(sub)));
            break;
        }
    }
    report.record(SEPM_ORDER, order);

    let blocks = decompose(sub, nu, &run.energy, usize::MAX)?;
    report.record(DECOMPOSITION, check_blocks(sub, &blocks, &run, &reference, local));

    let mut potential = Ok(());
    for s in &local.opt {
        let g = restrict(reweighted, s)?;
        let fast = least_feasible_potential(&g, reweighted.cap())?;
        let slow = naive_least_fp(&g, reweighted.cap());
        if fast != slow {
            potential = Err(format!("{}: {} vs {}", s.render(sub), fast.render(sub), slow.render(sub)));
            break;
        }
    }
    report.record(POTENTIAL, potential);

    let mut seeded = Ok(());
    for (parent, child) in run.subgames.recursion_edges() {
        report.recursion_edges += 1;
        let node = &run.subgames.nodes[child];
        let view = node.mask.view(&run.reweighted);
        let cap = run.reweighted.cap();
        let (plain, _) = least_sepm_capped(&view, cap, None);
        let (from_parent, _) =
            least_sepm_capped(&view, cap, Some(&run.energy.elements[run.subgames.phi(parent)]));
        let naive = naive_least_sepm(&view, cap);
        let stored = &run.energy.elements[node.least_sepm];
        if plain != *stored || from_parent != *stored || naive != *stored {
            seeded = Err(format!("subgame {child} (parent {parent}) disagrees"));
            break;
        }
    }
    report.record(SEEDED, seeded);

    report.record(
        STORE,
        ensure(run.duplicate_inserts == 0, || format!("{} duplicate inserts", run.duplicate_inserts)),
    );

    let again = enumerate(sub, nu)?;
    let again_blocks = decompose(sub, nu, &again.energy, usize::MAX)?;
    let first = enumeration_json(sub, &run, &blocks).to_string();
    let second = enumeration_json(sub, &again, &again_blocks).to_string();
    report.record(
        DETERMINISM,
        ensure(first == second, || "two runs produced different output".into()),
    );
    Ok(())
}

fn check_blocks(
    sub: &Arena,
    blocks: &[DeltaBlock],
    run: &Enumeration,
    reference: &[(EnergyFunction, Vec<PositionalStrategy>)],
    local: &ExhaustiveOpt,
) -> std::result::Result<(), String> {
    let mut seen: HashSet<&PositionalStrategy> = HashSet::new();
    for b in blocks {
        if b.count != b.strategies.len() as u128 {
            return Err(format!("block {} lists {} of {}", b.sepm_id, b.strategies.len(), b.count));
        }
        for s in &b.strategies {
            if !seen.insert(s) {
                return Err(format!("{} in two blocks", s.render(sub)));
            }
        }
        let f = &run.energy.elements[b.sepm_id];
        let expected = reference
            .iter()
            .find(|(g, _)| g == f)
            .map(|(_, ss)| sorted(ss))
            .unwrap_or_default();
        if sorted(&b.strategies) != expected {
            return Err(format!("block {} differs from the oracle's grouping", b.sepm_id));
        }
    }
    let opt: HashSet<&PositionalStrategy> = local.opt.iter().collect();
    ensure(seen == opt, || format!("union has {} strategies, opt has {}", seen.len(), opt.len()))
}

/// Longest table [`audit_convergence`] builds past the convergence point.
const AUDIT_ROWS: i128 = 1 << 16;

/// Runs the min-variant to its fixpoint, audits every row up to the
/// convergence bound (or [`AUDIT_ROWS`]), and checks the values stay put on the
/// winning region. Returns `(k_reached, k_bound)`.
pub fn audit_convergence(shifted: &Arena) -> Result<std::result::Result<(usize, i128), String>> {
    let fix = match min_ttpg_fixpoint(shifted) {
        Ok(fix) => fix,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let fstar = least_sepm(shifted, None);
    if fix.energy != fstar {
        return Ok(Err("thresholded values differ from the least SEPM".into()));
    }
    if fix.k_reached as i128 > fix.k_bound {
        return Ok(Err(format!("reached at {} beyond bound {}", fix.k_reached, fix.k_bound)));
    }
    let rows = fix.k_bound.min(AUDIT_ROWS).max(fix.k_reached as i128) as usize;
    let table = min_ttpg(shifted, rows)?;
    if let Err(e) = audit_min_table(shifted, &table) {
        return Ok(Err(e));
    }
    for k in fix.k_reached..=rows {
        for v in fstar.finite_vertices() {
            if table.row(k)[v] != fix.row[v] {
                return Ok(Err(format!("value at {} moved again at k={k}", shifted.name(v))));
            }
        }
    }
    Ok(Ok((fix.k_reached, fix.k_bound)))
}

/// [`audit_convergence`] on `arena` reweighted by `w - nu`.
pub fn ttpg_check(arena: &Arena, nu: crate::rational::Rational) -> Result<std::result::Result<(usize, i128), String>> {
    audit_convergence(&reweight(arena, nu)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::gen_random_arena;

    #[test]
    fn example_passes() {
        let r = verify_arena(&fixtures::gamma_ex(), VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{r}");
        assert!(!r.degenerate);
        assert_eq!((r.extremal_sepms, r.basic_subgames), (3, 3));
    }

    #[test]
    fn degenerate_passes() {
        let r = verify_arena(&fixtures::gamma_d(), VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.degenerate);
    }

    #[test]
    fn random_passes() {
        for seed in 0..20 {
            let a = gen_random_arena(5, 3, 4, seed);
            let r = verify_arena(&a, VerifyOptions::default()).unwrap();
            assert!(r.passed(), "seed {seed}\n{r}");
        }
    }

    #[test]
    fn bound_is_enforced() {
        let opts = VerifyOptions {
            max_strategies: 1,
            parallel: false,
        };
        assert!(verify_arena(&fixtures::gamma_ex(), opts).is_err());
    }
}
