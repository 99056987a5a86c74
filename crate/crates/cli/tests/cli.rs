use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn mpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpg"))
        .args(args)
        .env("MPG_LOG", "quiet")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mpg-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_example_text() {
    let ex = data("gamma_ex.arena");
    let o = mpg(&["solve", ex.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    for v in ["A", "B", "C", "D", "E", "F", "G"] {
        assert!(text.contains(&format!("  {v} -1/1\n")), "{text}");
    }
    let strategy = text.lines().last().unwrap();
    for pick in ["B->C", "D->A", "G->F"] {
        assert!(strategy.contains(pick), "{strategy}");
    }
}

#[test]
fn solve_json_is_parseable() {
    let d = data("gamma_d.arena");
    let o = mpg(&["solve", d.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for (_, v) in doc["values"].as_object().unwrap() {
        assert_eq!(v["num"], 0);
        assert_eq!(v["den"], 1);
    }
    assert_eq!(doc["classes"][0]["least_sepm"]["values"]["u3"], 1);
    assert_eq!(doc["strategy"]["choice"]["t"], "v4");
}

#[test]
fn malformed_input_exits_1_with_line() {
    let dir = scratch("bad");
    let bad = dir.join("bad.arena");
    std::fs::write(&bad, "v a 0\nv b 1\ne a b 1\ne b zz 1\n").unwrap();
    let o = mpg(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    let o = mpg(&["solve", dir.join("missing.arena").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enum_example() {
    let ex = data("gamma_ex.arena");
    let o = mpg(&["enum", ex.to_str().unwrap(), "--list-strategies", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("  sepm ")).count(), 3);
    assert_eq!(text.lines().filter(|l| l.starts_with("  subgame ")).count(), 3);
    let counts: Vec<&str> = text
        .lines()
        .filter_map(|l| l.strip_prefix("  block sepm "))
        .collect();
    assert_eq!(counts, ["0: 2 strategies", "1: 1 strategies", "2: 1 strategies"]);
    assert!(text.contains("E=3") && text.contains("E=7"));
    assert!(!text.contains("degenerate"));
}

#[test]
fn enum_reports_degeneracy() {
    let d = data("gamma_d.arena");
    let o = mpg(&["enum", d.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("degenerate: |B*| > |X*|"));
}

#[test]
fn enum_json_streams_then_summarizes() {
    let ex = data("gamma_ex.arena");
    let o = mpg(&["enum", ex.to_str().unwrap(), "--format", "json", "--list-strategies", "1"]);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let sepms = lines.iter().filter(|l| l["event"] == "sepm").count();
    let subgames = lines.iter().filter(|l| l["event"] == "subgame").count();
    assert_eq!((sepms, subgames), (3, 3));
    let done = lines.last().unwrap();
    assert_eq!(done["event"], "done");
    let class = &done["classes"][0];
    assert_eq!(class["nu"]["num"], -1);
    assert_eq!(class["extremal_sepms"][2]["values"]["E"], 7);
    assert_eq!(class["basic_subgames"][1]["parent_ids"][0], 0);
    assert_eq!(class["decomposition"][0]["count"], 2);
    assert_eq!(class["decomposition"][0]["strategies"].as_array().unwrap().len(), 1);
}

#[test]
fn enum_forced_arena() {
    let dir = scratch("forced");
    let f = dir.join("forced.arena");
    std::fs::write(&f, "v a 0\nv b 1\ne a b 2\ne b a 0\n").unwrap();
    let o = mpg(&["enum", f.to_str().unwrap(), "--list-strategies", "3"]);
    let text = stdout(&o);
    assert!(text.contains("|X*| = 1, |B*| = 1"), "{text}");
    assert!(text.contains("block sepm 0: 1 strategies\n    a->b\n"), "{text}");
}

#[test]
fn output_is_deterministic() {
    let d = data("gamma_d.arena");
    for format in ["text", "json"] {
        let a = mpg(&["enum", d.to_str().unwrap(), "--format", format, "--list-strategies", "2"]);
        let b = mpg(&["enum", d.to_str().unwrap(), "--format", format, "--list-strategies", "2"]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn ttpg_fixpoint_on_example() {
    let ex = data("gamma_ex.arena");
    let o = mpg(&["ttpg", ex.to_str().unwrap(), "--variant", "min", "--fixpoint", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["agrees_with_least_sepm"], true);
    assert_eq!(doc["k_bound"], 171);
    assert!(doc["k_reached"].as_u64().unwrap() <= 171);
    assert_eq!(doc["least_sepm"]["values"]["C"], 8);
}

#[test]
fn ttpg_tables() {
    let ex = data("gamma_ex.arena");
    let o = mpg(&["ttpg", ex.to_str().unwrap(), "--k", "0"]);
    assert_eq!(stdout(&o), "k\tA\tB\tC\tD\tE\tF\tG\n0\t0\t0\t0\t0\t0\t0\t0\n");

    let np = data("not_positional.arena");
    let o = mpg(&["ttpg", np.to_str().unwrap(), "--k", "5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arena = mpg_core::fixtures::not_positional();
    let expected = mpg_core::oracle::brute_force_truncated(&arena, 5);
    assert_eq!(doc["rows"], serde_json::json!(expected));

    let o = mpg(&["ttpg", ex.to_str().unwrap(), "--fixpoint"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_golden_and_random() {
    for name in ["gamma_ex.arena", "gamma_d.arena"] {
        let o = mpg(&["verify", data(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stdout(&o));
    }
    let o = mpg(&["verify", "--random", "6", "3", "4", "7", "200"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("pass: 200 arenas\n"));
}

#[test]
fn verify_bound_is_an_internal_error() {
    let o = mpg(&["verify", data("gamma_ex.arena").to_str().unwrap(), "--max-strategies", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
