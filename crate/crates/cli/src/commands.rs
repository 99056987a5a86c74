use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use mpg_core::lattice::{enumeration_json, DeltaBlock};
use mpg_core::oracle::gen_random_arena;
use mpg_core::values::{solve_classes, solve_values_with, strategy_from_classes};
use mpg_core::verify::{verify_arena, VerifyOptions};
use mpg_core::{
    decompose, enumerate_with, min_ttpg, min_ttpg_fixpoint, parse_arena, plain_ttpg, reweight,
    serialize_arena, Arena, EnumEvent, Rational, SolveError,
};
use serde_json::{json, Value};

use crate::{Format, TableFormat, Variant};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input.
    Input(String),
    /// Solver failure or bad request.
    Internal(String),
    /// At least one verification check failed.
    Verify(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
            CliError::Verify(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) | CliError::Verify(m) => f.write_str(m),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(format!("writing output: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load(path: &Path) -> Result<Arena> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_arena(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn rational_json(r: Rational) -> Value {
    json!({ "num": r.num(), "den": r.den() })
}

pub fn solve(path: &Path, format: Format, parallel: bool) -> Result<()> {
    let arena = load(path)?;
    let vals = solve_values_with(&arena, parallel)?;
    let classes = solve_classes(&arena, &vals)?;
    let strategy = strategy_from_classes(&arena, &classes);
    log::info!("{} vertices, {} value classes", arena.vertex_count(), classes.len());
    let mut out = io::stdout().lock();
    match format {
        Format::Json => {
            let classes: Vec<Value> = classes
                .iter()
                .map(|c| {
                    json!({
                        "nu": rational_json(c.class.nu),
                        "vertices": c.class.subgame.names(),
                        "least_sepm": c.least_sepm.to_json(&c.reweighted),
                    })
                })
                .collect();
            let doc = json!({
                "values": vals.to_json(&arena)["values"],
                "classes": classes,
                "strategy": strategy.to_json(&arena),
            });
            writeln!(out, "{doc}")?;
        }
        Format::Text => {
            writeln!(out, "values")?;
            for v in arena.vertices() {
                writeln!(out, "  {} {}", arena.name(v), vals.get(v))?;
            }
            for c in &classes {
                writeln!(out, "class {}: {}", c.class.nu, c.class.subgame.names().join(" "))?;
                writeln!(
                    out,
                    "  least SEPM (scale {}): {}",
                    c.reweighted.scale(),
                    c.least_sepm.render(&c.reweighted)
                )?;
            }
            writeln!(out, "strategy")?;
            writeln!(out, "  {}", strategy.render(&arena))?;
        }
    }
    Ok(())
}

fn removed_text(arena: &Arena, arcs: &[usize]) -> String {
    if arcs.is_empty() {
        return "-".into();
    }
    arcs.iter()
        .map(|&id| {
            let a = arena.arc(id);
            format!("({},{})", arena.name(a.src), arena.name(a.dst))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn enumerate(path: &Path, list: usize, format: Format, parallel: bool) -> Result<()> {
    let arena = load(path)?;
    let vals = solve_values_with(&arena, parallel)?;
    let classes = solve_classes(&arena, &vals)?;
    let mut out = io::stdout().lock();
    let mut reports = Vec::new();
    let mut degenerate = false;
    for (ci, sol) in classes.iter().enumerate() {
        let sub = &sol.class.subgame;
        let nu = sol.class.nu;
        if format == Format::Text {
            writeln!(out, "class {ci} nu={nu}: {}", sub.names().join(" "))?;
        }
        let mut write_error = None;
        let run = enumerate_with(sub, nu, &mut |event| {
            let line = match (format, event) {
                (Format::Text, EnumEvent::Sepm { id, f }) => {
                    format!("  sepm {id}: {}", f.render(sub))
                }
                (Format::Text, EnumEvent::Subgame { id, node }) => format!(
                    "  subgame {id}: parent {} removed {} -> sepm {}",
                    node.parent.map_or("-".into(), |p| p.to_string()),
                    removed_text(sub, &node.mask.removed()),
                    node.least_sepm
                ),
                (Format::Json, EnumEvent::Sepm { id, f }) => json!({
                    "event": "sepm", "class": ci, "id": id, "sepm": f.to_json(sub),
                })
                .to_string(),
                (Format::Json, EnumEvent::Subgame { id, node }) => json!({
                    "event": "subgame", "class": ci, "id": id,
                    "parent_id": node.parent, "least_sepm_id": node.least_sepm,
                })
                .to_string(),
            };
            if write_error.is_none() {
                if let Err(e) = writeln!(out, "{line}") {
                    write_error = Some(e);
                }
            }
        })?;
        if let Some(e) = write_error {
            return Err(e.into());
        }
        let blocks = decompose(sub, nu, &run.energy, list)?;
        if run.is_degenerate() {
            degenerate = true;
        }
        match format {
            Format::Text => {
                write_blocks(&mut out, sub, &blocks)?;
                writeln!(
                    out,
                    "  |X*| = {}, |B*| = {}",
                    run.energy.len(),
                    run.subgames.len()
                )?;
            }
            Format::Json => reports.push(enumeration_json(sub, &run, &blocks)),
        }
    }
    match format {
        Format::Text => {
            if degenerate {
                writeln!(out, "degenerate: |B*| > |X*|")?;
            }
        }
        Format::Json => {
            writeln!(out, "{}", json!({ "event": "done", "degenerate": degenerate, "classes": reports }))?;
        }
    }
    Ok(())
}

fn write_blocks(out: &mut impl Write, arena: &Arena, blocks: &[DeltaBlock]) -> io::Result<()> {
    for b in blocks {
        writeln!(out, "  block sepm {}: {} strategies", b.sepm_id, b.count)?;
        for s in &b.strategies {
            writeln!(out, "    {}", s.render(arena))?;
        }
    }
    Ok(())
}

/// The arena reweighted by its common value, if it has one.
fn shift_by_value(arena: &Arena, parallel: bool) -> Result<Arena> {
    let vals = solve_values_with(arena, parallel)?;
    let nu = vals.get(0);
    if vals.values().iter().any(|&x| x != nu) {
        return Err(CliError::Internal(
            "arena has more than one value; shift needs a single value class".into(),
        ));
    }
    log::info!("reweighting by value {nu}");
    Ok(reweight(arena, nu).map_err(SolveError::from)?)
}

pub fn ttpg(
    path: &Path,
    k: usize,
    variant: Variant,
    fixpoint: bool,
    shift: bool,
    format: TableFormat,
    parallel: bool,
) -> Result<()> {
    if fixpoint && variant != Variant::Min {
        return Err(CliError::Internal("--fixpoint requires --variant min".into()));
    }
    let mut arena = load(path)?;
    if shift || fixpoint {
        arena = shift_by_value(&arena, parallel)?;
    }
    let mut out = io::stdout().lock();
    if fixpoint {
        let fix = min_ttpg_fixpoint(&arena)?;
        let agrees = fix.energy == mpg_core::least_sepm(&arena, None);
        match format {
            TableFormat::Json => writeln!(
                out,
                "{}",
                json!({
                    "k_reached": fix.k_reached,
                    "k_bound": fix.k_bound,
                    "agrees_with_least_sepm": agrees,
                    "least_sepm": fix.energy.to_json(&arena),
                    "row": fix.row,
                })
            )?,
            TableFormat::Tsv => {
                writeln!(out, "k_reached\t{}", fix.k_reached)?;
                writeln!(out, "k_bound\t{}", fix.k_bound)?;
                writeln!(out, "agrees_with_least_sepm\t{agrees}")?;
                writeln!(out, "least_sepm\t{}", fix.energy.render(&arena))?;
            }
        }
        return Ok(());
    }
    let table = match variant {
        Variant::Plain => plain_ttpg(&arena, k)?,
        Variant::Min => min_ttpg(&arena, k)?,
    };
    match format {
        TableFormat::Tsv => write!(out, "{}", table.to_tsv(&arena))?,
        TableFormat::Json => writeln!(out, "{}", table.to_json(&arena))?,
    }
    Ok(())
}

pub fn verify(
    path: Option<&Path>,
    random: Option<&[u64]>,
    max_strategies: u128,
    reproducer_dir: &Path,
    parallel: bool,
) -> Result<()> {
    let opts = VerifyOptions {
        max_strategies,
        parallel,
    };
    let cases: Vec<(String, Arena)> = match (path, random) {
        (Some(p), _) => vec![(p.display().to_string(), load(p)?)],
        (None, Some(&[n, m, w, seed, count])) => {
            if n == 0 || m == 0 {
                return Err(CliError::Input("--random needs N >= 1 and M >= 1".into()));
            }
            (seed..seed + count)
                .map(|s| (format!("random seed {s}"), gen_random_arena(n as usize, m as usize, w as i64, s)))
                .collect()
        }
        _ => return Err(CliError::Input("give a file or --random N M W SEED COUNT".into())),
    };
    let mut out = io::stdout().lock();
    let mut failed = 0usize;
    let mut degenerate = 0usize;
    for (i, (label, arena)) in cases.iter().enumerate() {
        let report = verify_arena(arena, opts)?;
        if report.degenerate {
            degenerate += 1;
        }
        if report.passed() {
            log::info!("{label}: pass");
            if cases.len() == 1 {
                write!(out, "{report}")?;
            }
            continue;
        }
        failed += 1;
        let file = reproducer_dir.join(format!("mpg-repro-{i}.arena"));
        std::fs::write(&file, serialize_arena(arena))
            .map_err(|e| CliError::Internal(format!("{}: {e}", file.display())))?;
        writeln!(out, "{label}: FAIL (reproducer {})", file.display())?;
        for c in report.failures() {
            writeln!(out, "  {}: {}", c.name, c.failure.as_deref().unwrap_or(""))?;
        }
    }
    if degenerate > 0 {
        writeln!(out, "degenerate: |B*| > |X*| in {degenerate} of {} arenas", cases.len())?;
    }
    if failed > 0 {
        return Err(CliError::Verify(format!("{failed} of {} arenas failed", cases.len())));
    }
    writeln!(out, "pass: {} arenas", cases.len())?;
    Ok(())
}
