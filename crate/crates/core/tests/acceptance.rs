//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Run with `cargo test --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use common::{brute_owners_at_face, glue_failures, random_element, random_forest, rng};
use hyghost::cmesh::BUILTIN_NAMES;
use hyghost::forest::Forest;
use hyghost::ghost::{compute_mirrors, exchange, oracle_mirrors, Algorithm, Mirrors};
use hyghost::harness::{build_forest, efficiency, run_ghost, Pattern, RankRow, RunReport, ScenarioConfig};
use hyghost::tabulate::tables;
use hyghost::vtk::vtk_string;
use hyghost::Scheme;
use rand::seq::SliceRandom;
use rand::Rng;

const TABLES_MAX_SECONDS: f64 = 1.0;
const SUITE_MAX_SECONDS: f64 = 600.0;
const MIN_SCENARIOS: usize = 100;
const MIN_V1_SCENARIOS: usize = 30;
const OWNER_TRIPLES: usize = 1000;
/// Relative tolerance for the efficiency formula.
const EFFICIENCY_RTOL: f64 = f64::EPSILON;

const SUITE_MESHES: [&str; 5] = ["hex_cube", "tet_cube", "tri_unit", "hybrid_cube", "periodic_quad"];
const SUITE_RANKS: [usize; 6] = [1, 2, 3, 7, 16, 64];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn all(f: &Forest, algo: Algorithm) -> Vec<Mirrors> {
    (0..f.num_ranks()).map(|p| compute_mirrors(f, p, algo).0).collect()
}

fn table_conformance() -> Outcome {
    let t = Instant::now();
    let text = tables(None, None);
    let secs = t.elapsed().as_secs_f64();
    let expected = std::fs::read_to_string(fixture("tables.txt")).unwrap();
    let sections = text.lines().filter(|l| l.starts_with('[')).count();
    let same = text == expected;
    outcome(
        same && secs < TABLES_MAX_SECONDS,
        format!("{sections} sections, byte-identical={same}, {secs:.3} s < {TABLES_MAX_SECONDS} s"),
    )
}

/// Largest base level that keeps a scenario at desk size.
fn max_level(name: &str) -> u8 {
    match name {
        "hybrid_cube" => 3,
        "tet_cube" => 4,
        _ => 5,
    }
}

fn random_config(r: &mut impl Rng) -> ScenarioConfig {
    let cmesh = *SUITE_MESHES.choose(r).unwrap();
    let top = max_level(cmesh);
    let ranks = *SUITE_RANKS.choose(r).unwrap();
    let (level, extra_levels, pattern) = match r.gen_range(0..3) {
        0 => (r.gen_range(1..=top), 0, Pattern::Uniform),
        1 => {
            let rounds = r.gen_range(1..=2);
            (r.gen_range(1..=top - rounds), 0, Pattern::EveryThird { rounds })
        }
        _ => {
            let extra = r.gen_range(1..=2);
            (r.gen_range(1..=top - extra), extra, Pattern::Band { step: r.gen_range(0..=4) as f64 })
        }
    };
    ScenarioConfig {
        cmesh: cmesh.into(),
        level,
        extra_levels,
        pattern,
        ranks,
        balance: r.gen_bool(0.5),
        seed: r.gen(),
        ..ScenarioConfig::default()
    }
}

struct SuiteResult {
    scenarios: usize,
    balanced: usize,
    unbalanced: usize,
    failures: Vec<String>,
    v1_runs: usize,
    v1_failures: Vec<String>,
    symmetric: usize,
    symmetry_failures: Vec<String>,
    seconds: f64,
}

fn oracle_suite() -> SuiteResult {
    let t = Instant::now();
    let mut r = rng(2020);
    let mut s = SuiteResult {
        scenarios: 0,
        balanced: 0,
        unbalanced: 0,
        failures: Vec::new(),
        v1_runs: 0,
        v1_failures: Vec::new(),
        symmetric: 0,
        symmetry_failures: Vec::new(),
        seconds: 0.0,
    };
    while s.scenarios < MIN_SCENARIOS + 20 {
        let cfg = random_config(&mut r);
        let f = build_forest(&cfg, Scheme::default()).unwrap();
        let label = cfg.to_text().replace('\n', " ");
        s.scenarios += 1;
        if f.is_balanced() {
            s.balanced += 1;
        } else {
            s.unbalanced += 1;
        }
        let oracle = oracle_mirrors(&f).unwrap();
        let v2 = all(&f, Algorithm::V2);
        let v3 = all(&f, Algorithm::V3);
        if v2 != oracle || v3 != oracle {
            s.failures.push(label.clone());
            continue;
        }
        let layers: Vec<_> = [&oracle, &v2, &v3].into_iter().map(|m| exchange(&f, m)).collect();
        match &layers[..] {
            [Ok(a), Ok(b), Ok(c)] => {
                s.symmetric += 1;
                if a != b || b != c {
                    s.failures.push(format!("{label}: ghost arrays differ"));
                }
            }
            _ => s.symmetry_failures.push(label.clone()),
        }
        let single_round = matches!(cfg.pattern, Pattern::Uniform | Pattern::EveryThird { rounds: 1 })
            || (matches!(cfg.pattern, Pattern::Band { .. }) && cfg.extra_levels == 1);
        if f.is_balanced() && single_round {
            s.v1_runs += 1;
            if all(&f, Algorithm::V1) != oracle {
                s.v1_failures.push(label);
            }
        }
    }
    s.seconds = t.elapsed().as_secs_f64();
    s
}

fn exact_counts() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, per_rank, total) in [("tet_cube", 24, 24576), ("hex_cube", 4, 4096)] {
        let cfg = ScenarioConfig { cmesh: name.into(), level: 4, ranks: 1024, ..ScenarioConfig::default() };
        let f = build_forest(&cfg, Scheme::default()).unwrap();
        let counts: Vec<usize> = (0..f.num_ranks()).map(|p| f.local_count(p)).collect();
        ok &= f.num_leaves() == total && counts.iter().all(|&c| c == per_rank);
        details.push(format!(
            "{name} l=4 P=1024: {} leaves, {}..{} per rank",
            f.num_leaves(),
            counts.iter().min().unwrap(),
            counts.iter().max().unwrap()
        ));
    }
    outcome(ok, details.join("; "))
}

fn pruning() -> Outcome {
    let mut fr = Vec::new();
    let mut v2_all = true;
    for level in 3..=5 {
        let cfg = ScenarioConfig { level, ranks: 8, ..ScenarioConfig::default() };
        let f = build_forest(&cfg, Scheme::default()).unwrap();
        let v3 = run_ghost(&f, Algorithm::V3).unwrap();
        let v2 = run_ghost(&f, Algorithm::V2).unwrap();
        v2_all &= v2.visited_leaves() == f.num_leaves();
        fr.push(v3.visited_leaves() as f64 / f.num_leaves() as f64);
    }
    let ok = v2_all && fr.windows(2).all(|w| w[1] < w[0]) && fr.iter().all(|&x| x < 1.0);
    outcome(ok, format!("v3 visited fraction l=3,4,5: {:.4} {:.4} {:.4}; v2 visits all: {v2_all}", fr[0], fr[1], fr[2]))
}

fn synthetic_report(seconds: f64, ghosts: &[usize]) -> RunReport {
    RunReport {
        config: ScenarioConfig { ranks: ghosts.len(), ..ScenarioConfig::default() },
        total_leaves: 0,
        rows: ghosts
            .iter()
            .enumerate()
            .map(|(rank, &g)| RankRow {
                rank,
                elements: 0,
                ghosts: g,
                remotes: 0,
                visited_leaves: 0,
                pruned: 0,
                seconds: 0.0,
            })
            .collect(),
        seconds,
        verification: None,
    }
}

fn efficiency_arithmetic() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut r = rng(7);
    for _ in 0..1000 {
        let (t1, t2): (f64, f64) = (r.gen_range(1e-4..10.0), r.gen_range(1e-4..10.0));
        let g1: Vec<usize> = (0..r.gen_range(1..9)).map(|_| r.gen_range(1..5000)).collect();
        let g2: Vec<usize> = (0..r.gen_range(1..65)).map(|_| r.gen_range(1..5000)).collect();
        let (a, b) = (synthetic_report(t1, &g1), synthetic_report(t2, &g2));
        let (m1, m2) = (a.mean_ghosts(), b.mean_ghosts());
        let want = t1 * m2 / (t2 * m1);
        let direct = efficiency(t1, m1, t2, m2);
        let reported = b.json(Some(&a))["efficiency"].as_f64().unwrap();
        for got in [direct, reported] {
            worst = worst.max(((got - want) / want).abs());
        }
    }
    let exact = efficiency(2.0, 3.0, 5.0, 7.0) == 14.0 / 15.0;
    outcome(
        worst <= EFFICIENCY_RTOL && exact,
        format!("1000 synthetic pairs, max relative error {worst:.1e} <= {EFFICIENCY_RTOL:.1e}"),
    )
}

fn owners_at_face_oracle() -> Outcome {
    let mut r = rng(99);
    let meshes = ["hex_cube", "tet_cube", "tri_unit", "hybrid_cube", "periodic_quad", "prism_cube", "quad_twisted"];
    let (mut triples, mut bad) = (0, Vec::new());
    while triples < OWNER_TRIPLES {
        let name = *meshes.choose(&mut r).unwrap();
        let top = if name == "hybrid_cube" { 3 } else { 5 };
        let ranks = r.gen_range(1..=16);
        let f = random_forest(&mut r, name, top, ranks);
        for _ in 0..20 {
            let (k, e) = random_element(&mut r, &f);
            let face = r.gen_range(0..e.shape.num_faces() as u8);
            let want = brute_owners_at_face(&f, k, &e, face);
            let full = f.owners_at_face(k, &e, face, f.full_window());
            let windowed = f.owners_at_face(k, &e, face, f.owner_range(k, &e));
            if full != want || windowed != want {
                bad.push(format!("{name} tree {k} {e} face {face}"));
            }
            triples += 1;
        }
    }
    outcome(bad.is_empty(), format!("{triples} triples, {} failures {:?}", bad.len(), &bad[..bad.len().min(3)]))
}

fn export_golden() -> Outcome {
    let cfg = ScenarioConfig { cmesh: "hybrid_cube".into(), level: 1, ranks: 4, ..ScenarioConfig::default() };
    let f = build_forest(&cfg, Scheme::default()).unwrap();
    let text = vtk_string(&f, None).unwrap();
    let golden = std::fs::read_to_string(fixture("hybrid_cube_l1.vtk")).unwrap();
    let types = golden.split("CELL_TYPES").nth(1).unwrap();
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for l in types.lines().skip(1).take_while(|l| !l.starts_with("CELL_DATA")) {
        *counts.entry(l.parse().unwrap()).or_default() += 1;
    }
    let (hex, wedge, tet) = (counts.get(&12).copied(), counts.get(&13).copied(), counts.get(&10).copied());
    let ok = text == golden && hex == Some(32) && wedge == Some(48) && tet == Some(48) && counts.len() == 3;
    outcome(ok, format!("byte-identical={}, hex={hex:?} wedge={wedge:?} tet={tet:?}", text == golden))
}

fn neighbor_round_trip() -> Outcome {
    let (mut checked, mut fails) = (0, Vec::new());
    for &name in BUILTIN_NAMES {
        for level in 0..=3 {
            let (c, f) = glue_failures(name, level);
            checked += c;
            fails.extend(f.into_iter().map(|m| format!("{name} l={level} {m}")));
        }
    }
    outcome(
        fails.is_empty(),
        format!(
            "{} meshes, levels 0..=3, {checked} faces, {} failures {:?}",
            BUILTIN_NAMES.len(),
            fails.len(),
            &fails[..fails.len().min(3)]
        ),
    )
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    let mut record = |n: usize, name: &str, o: Outcome| {
        let line = format!("{} {n:>2} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        println!("{line}");
        lines.push((o.ok, line));
    };

    record(1, "table conformance", table_conformance());

    let s = oracle_suite();
    record(
        2,
        "oracle equivalence",
        outcome(
            s.failures.is_empty()
                && s.scenarios >= MIN_SCENARIOS
                && s.balanced > 0
                && s.unbalanced > 0
                && s.seconds < SUITE_MAX_SECONDS,
            format!(
                "{} scenarios ({} balanced, {} unbalanced), {} failures {:?}, {:.1} s < {SUITE_MAX_SECONDS} s",
                s.scenarios,
                s.balanced,
                s.unbalanced,
                s.failures.len(),
                &s.failures[..s.failures.len().min(3)],
                s.seconds
            ),
        ),
    );
    record(
        3,
        "v1 equivalence on balanced forests",
        outcome(
            s.v1_failures.is_empty() && s.v1_runs >= MIN_V1_SCENARIOS,
            format!(
                "{} runs >= {MIN_V1_SCENARIOS}, {} failures {:?}",
                s.v1_runs,
                s.v1_failures.len(),
                &s.v1_failures[..s.v1_failures.len().min(3)]
            ),
        ),
    );
    record(
        4,
        "symmetry",
        outcome(
            s.symmetry_failures.is_empty(),
            format!("{} runs symmetric, {} asymmetric", s.symmetric, s.symmetry_failures.len()),
        ),
    );
    record(5, "neighbor round trip", neighbor_round_trip());
    record(6, "exact counts", exact_counts());
    record(7, "pruning effectiveness", pruning());
    record(8, "efficiency arithmetic", efficiency_arithmetic());
    record(9, "owners at face oracle", owners_at_face_oracle());
    record(10, "export golden", export_golden());

    let failed: Vec<&String> = lines.iter().filter(|(ok, _)| !ok).map(|(_, l)| l).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}
