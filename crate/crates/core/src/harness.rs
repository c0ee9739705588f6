//! Experiment driver: scenario construction, ghost runs on all simulated
//! ranks, oracle verification and summary statistics.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use crate::cmesh::{CmeshError, CoarseMesh};
use crate::element::{ElementError, Scheme};
use crate::forest::{Adapt, Forest, ForestError};
use crate::ghost::{compute_mirrors, exchange, verify, Algorithm, GhostError, GhostLayer, Mirrors, Verification};
use crate::search::SearchStats;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Cmesh(#[from] CmeshError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Ghost(#[from] GhostError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Moving refinement band between two parallel planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    /// Unit normal.
    pub normal: [f64; 3],
    pub width: f64,
    pub speed: f64,
}

impl Default for Band {
    fn default() -> Self {
        Band { normal: [2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0], width: 0.25, speed: 1.0 / 64.0 }
    }
}

impl Band {
    pub fn time_step(&self, level: u8) -> f64 {
        0.8 / ((1u64 << level) as f64 * self.speed)
    }

    /// Plane offset after `step` time steps on a mesh of base level `level`.
    pub fn offset(&self, level: u8, step: f64) -> f64 {
        let dx = self.speed * self.time_step(level);
        0.56 - 2.5 * dx + step * dx
    }

    pub fn contains(&self, level: u8, step: f64, x: [f64; 3]) -> bool {
        let s = self.normal[0] * x[0] + self.normal[1] * x[1] + self.normal[2] * x[2] - self.offset(level, step);
        (0.0..=self.width).contains(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shell {
    pub center: [f64; 3],
    pub radius: f64,
    pub thickness: f64,
}

impl Default for Shell {
    fn default() -> Self {
        Shell { center: [0.5, 0.5, 0.5], radius: 0.35, thickness: 0.1 }
    }
}

impl Shell {
    pub fn contains(&self, dim: usize, x: [f64; 3]) -> bool {
        let r: f64 = (0..dim).map(|a| (x[a] - self.center[a]).powi(2)).sum::<f64>().sqrt();
        (r - self.radius).abs() <= self.thickness / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern {
    Uniform,
    /// Rounds of refining every leaf at global position `2 mod 3`.
    EveryThird {
        rounds: u8,
    },
    /// Band position after this many time steps.
    Band {
        step: f64,
    },
    Shell,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Uniform => f.write_str("uniform"),
            Pattern::EveryThird { rounds } => write!(f, "third:{rounds}"),
            Pattern::Band { step } => write!(f, "band:{step}"),
            Pattern::Shell => f.write_str("shell"),
        }
    }
}

impl FromStr for Pattern {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("unknown pattern `{s}`"));
        let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
        match (name, arg) {
            ("uniform", None) => Ok(Pattern::Uniform),
            ("shell", None) => Ok(Pattern::Shell),
            ("third", Some(r)) => Ok(Pattern::EveryThird { rounds: r.parse().map_err(|_| bad())? }),
            ("band", Some(t)) => Ok(Pattern::Band { step: t.parse().map_err(|_| bad())? }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cmesh: String,
    pub level: u8,
    pub extra_levels: u8,
    pub pattern: Pattern,
    pub ranks: usize,
    pub algo: Algorithm,
    pub balance: bool,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            cmesh: "hex_cube".into(),
            level: 2,
            extra_levels: 0,
            pattern: Pattern::Uniform,
            ranks: 1,
            algo: Algorithm::V3,
            balance: false,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// Parses `key=value` lines; `#` starts a comment. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut c = ScenarioConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| HarnessError::Config(format!("line {}: {m}", i + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "cmesh" => c.cmesh = v.to_string(),
                "level" => c.level = v.parse().map_err(|_| err("bad level"))?,
                "extra_levels" => c.extra_levels = v.parse().map_err(|_| err("bad extra_levels"))?,
                "pattern" => c.pattern = v.parse()?,
                "ranks" => c.ranks = v.parse().map_err(|_| err("bad ranks"))?,
                "algo" => c.algo = v.parse()?,
                "balance" => c.balance = v.parse().map_err(|_| err("bad balance"))?,
                "seed" => c.seed = v.parse().map_err(|_| err("bad seed"))?,
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        format!(
            "cmesh={}\nlevel={}\nextra_levels={}\npattern={}\nranks={}\nalgo={}\nbalance={}\nseed={}\n",
            self.cmesh, self.level, self.extra_levels, self.pattern, self.ranks, self.algo, self.balance, self.seed
        )
    }

    /// Deepest level any leaf can reach.
    pub fn finest_level(&self) -> u8 {
        match self.pattern {
            Pattern::Uniform => self.level,
            Pattern::EveryThird { rounds } => self.level.saturating_add(rounds),
            _ => self.level.saturating_add(self.extra_levels),
        }
    }

    pub fn validate(&self, scheme: &Scheme) -> Result<(), HarnessError> {
        if self.ranks == 0 {
            return Err(HarnessError::Config("ranks must be at least 1".into()));
        }
        if self.finest_level() > scheme.max_level() {
            return Err(HarnessError::Config(format!(
                "level {} exceeds max level {}",
                self.finest_level(),
                scheme.max_level()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "cmesh": self.cmesh,
            "level": self.level,
            "extra_levels": self.extra_levels,
            "pattern": self.pattern.to_string(),
            "ranks": self.ranks,
            "algo": self.algo.name(),
            "balance": self.balance,
            "seed": self.seed,
        })
    }
}

/// Leaf midpoints in domain coordinates, one per leaf of tree `k`.
fn midpoints(forest: &Forest, k: usize) -> Result<Vec<[f64; 3]>, HarnessError> {
    let cm = forest.cmesh();
    let geo =
        cm.geometry().ok_or_else(|| HarnessError::Config(format!("coarse mesh `{}` has no coordinates", cm.name)))?;
    let sc = forest.scheme();
    let scale = sc.root_len() as i64;
    let unit = (geo.denom * scale) as f64;
    let mut buf = [[0i64; 3]; 8];
    Ok(forest
        .tree_leaves(k)
        .iter()
        .map(|e| {
            let n = sc.vertices_into(e, &mut buf);
            let mut m = [0f64; 3];
            for v in &buf[..n] {
                let g = geo.maps[k].apply(*v, scale);
                for a in 0..3 {
                    m[a] += g[a] as f64;
                }
            }
            m.map(|x| x / (n as f64 * unit))
        })
        .collect())
}

/// Refines leaves below `max_level` whose midpoint satisfies `pred`, once.
fn refine_where(forest: &Forest, max_level: u8, pred: impl Fn([f64; 3]) -> bool) -> Result<Forest, HarnessError> {
    let marks: Vec<Vec<bool>> = (0..forest.num_trees())
        .map(|k| midpoints(forest, k).map(|ms| ms.into_iter().map(&pred).collect()))
        .collect::<Result<_, _>>()?;
    Ok(forest.adapt(|info, e| {
        let (k, i) = forest.locate(info.global_index);
        if e.level < max_level && marks[k][i] {
            Adapt::Refine
        } else {
            Adapt::Keep
        }
    }))
}

/// Uniform forest, pattern refinement, optional balance, even repartition.
pub fn build_forest(cfg: &ScenarioConfig, scheme: Scheme) -> Result<Forest, HarnessError> {
    cfg.validate(&scheme)?;
    let cmesh = Arc::new(CoarseMesh::load(&cfg.cmesh)?);
    let dim = cmesh.dim();
    let mut f = Forest::new_uniform(cmesh, scheme, cfg.level, cfg.ranks)?;
    let top = cfg.finest_level();
    match cfg.pattern {
        Pattern::Uniform => {}
        Pattern::EveryThird { rounds } => {
            for _ in 0..rounds {
                f = f.adapt(|info, _| if info.global_index % 3 == 2 { Adapt::Refine } else { Adapt::Keep });
            }
        }
        Pattern::Band { step } => {
            let band = Band::default();
            for _ in 0..cfg.extra_levels {
                f = refine_where(&f, top, |x| band.contains(cfg.level, step, x))?;
            }
        }
        Pattern::Shell => {
            let shell = Shell::default();
            for _ in 0..cfg.extra_levels {
                f = refine_where(&f, top, |x| shell.contains(dim, x))?;
            }
        }
    }
    if cfg.balance {
        f = f.balance();
    }
    Ok(f.repartition())
}

/// Per-rank statistics row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRow {
    pub rank: usize,
    pub elements: usize,
    pub ghosts: usize,
    pub remotes: usize,
    pub visited_leaves: usize,
    pub pruned: usize,
    pub seconds: f64,
}

pub const CSV_HEADER: &str = "rank,elements,ghosts,remotes,visited_leaves,pruned,seconds";

/// Mirrors, ghosts and counters of one ghost construction on every rank.
#[derive(Debug, Clone)]
pub struct GhostRun {
    pub algo: Algorithm,
    pub mirrors: Vec<Mirrors>,
    pub stats: Vec<SearchStats>,
    pub seconds: Vec<f64>,
    pub exchange_seconds: f64,
    pub layer: GhostLayer,
}

impl GhostRun {
    /// Wall time of the ghost phase: all ranks' mirror computation plus the exchange.
    pub fn total_seconds(&self) -> f64 {
        self.seconds.iter().sum::<f64>() + self.exchange_seconds
    }

    pub fn visited_leaves(&self) -> usize {
        self.stats.iter().map(|s| s.visited_leaves).sum()
    }
}

pub fn run_ghost(forest: &Forest, algo: Algorithm) -> Result<GhostRun, HarnessError> {
    let p = forest.num_ranks();
    let mut mirrors = Vec::with_capacity(p);
    let mut stats = Vec::with_capacity(p);
    let mut seconds = Vec::with_capacity(p);
    for r in 0..p {
        let t = Instant::now();
        let (m, s) = compute_mirrors(forest, r, algo);
        seconds.push(t.elapsed().as_secs_f64());
        mirrors.push(m);
        stats.push(s);
    }
    let t = Instant::now();
    let layer = exchange(forest, &mirrors)?;
    let exchange_seconds = t.elapsed().as_secs_f64();
    Ok(GhostRun { algo, mirrors, stats, seconds, exchange_seconds, layer })
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub total_leaves: usize,
    pub rows: Vec<RankRow>,
    /// Ghost phase wall time.
    pub seconds: f64,
    pub verification: Option<Verification>,
}

impl RunReport {
    pub fn from_run(config: ScenarioConfig, forest: &Forest, run: &GhostRun) -> Self {
        let rows = (0..forest.num_ranks())
            .map(|p| RankRow {
                rank: p,
                elements: forest.local_count(p),
                ghosts: run.layer.ranks[p].ghosts.len(),
                remotes: run.layer.ranks[p].remotes.len(),
                visited_leaves: run.stats[p].visited_leaves,
                pruned: run.stats[p].pruned,
                seconds: run.seconds[p],
            })
            .collect();
        RunReport { config, total_leaves: forest.num_leaves(), rows, seconds: run.total_seconds(), verification: None }
    }

    pub fn total_ghosts(&self) -> usize {
        self.rows.iter().map(|r| r.ghosts).sum()
    }

    pub fn mean_elements(&self) -> f64 {
        self.total_leaves as f64 / self.rows.len() as f64
    }

    pub fn max_elements(&self) -> usize {
        self.rows.iter().map(|r| r.elements).max().unwrap_or(0)
    }

    pub fn mean_ghosts(&self) -> f64 {
        self.total_ghosts() as f64 / self.rows.len() as f64
    }

    pub fn max_ghosts(&self) -> usize {
        self.rows.iter().map(|r| r.ghosts).max().unwrap_or(0)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.6}",
                r.rank, r.elements, r.ghosts, r.remotes, r.visited_leaves, r.pruned, r.seconds
            );
        }
        s
    }

    /// Summary object; `reference` is an earlier run to compute the efficiency against.
    pub fn json(&self, reference: Option<&RunReport>) -> serde_json::Value {
        json!({
            "config": self.config.to_json(),
            "totals": {
                "leaves": self.total_leaves,
                "ghosts": self.total_ghosts(),
                "mean_elements_per_rank": self.mean_elements(),
                "max_elements_per_rank": self.max_elements(),
                "mean_ghosts_per_rank": self.mean_ghosts(),
                "max_ghosts_per_rank": self.max_ghosts(),
                "visited_leaves": self.rows.iter().map(|r| r.visited_leaves).sum::<usize>(),
                "pruned": self.rows.iter().map(|r| r.pruned).sum::<usize>(),
                "seconds": self.seconds,
            },
            "verified": self.verification.as_ref().map(Verification::passed),
            "efficiency": reference
                .filter(|r| r.mean_ghosts() > 0.0)
                .map(|r| efficiency(r.seconds, r.mean_ghosts(), self.seconds, self.mean_ghosts())),
        })
    }
}

/// Parallel efficiency of a second run relative to a first one, `T1 G2 / (T2 G1)`.
pub fn efficiency(t1: f64, g1: f64, t2: f64, g2: f64) -> f64 {
    t1 * g2 / (t2 * g1)
}

/// Builds the scenario, runs the configured algorithm on every rank and
/// optionally checks the result against the oracle.
pub fn run_scenario(cfg: &ScenarioConfig, scheme: Scheme, check: bool) -> Result<RunReport, HarnessError> {
    let forest = build_forest(cfg, scheme)?;
    let run = run_ghost(&forest, cfg.algo)?;
    let mut report = RunReport::from_run(cfg.clone(), &forest, &run);
    if check {
        report.verification = Some(verify(&forest, &run.mirrors)?);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub algo: Algorithm,
    pub seconds: f64,
    pub visited_leaves: usize,
    pub total_leaves: usize,
    pub ghosts: usize,
    /// Mirror sets equal those of v2.
    pub agrees: bool,
}

/// Runs every applicable algorithm on the same forest. v1 runs only on balanced forests.
pub fn compare_algorithms(cfg: &ScenarioConfig, scheme: Scheme) -> Result<Vec<CompareRow>, HarnessError> {
    let forest = build_forest(cfg, scheme)?;
    let algos: Vec<Algorithm> =
        if forest.is_balanced() { Algorithm::ALL.to_vec() } else { vec![Algorithm::V2, Algorithm::V3] };
    let runs: Vec<GhostRun> = algos.iter().map(|&a| run_ghost(&forest, a)).collect::<Result<_, _>>()?;
    let v2 = runs.iter().find(|r| r.algo == Algorithm::V2).expect("v2 always runs");
    let v3 = runs.iter().find(|r| r.algo == Algorithm::V3).expect("v3 always runs");
    assert!(v3.visited_leaves() <= v2.visited_leaves(), "search visited more leaves than the full loop");
    Ok(runs
        .iter()
        .map(|r| CompareRow {
            algo: r.algo,
            seconds: r.total_seconds(),
            visited_leaves: r.visited_leaves(),
            total_leaves: forest.num_leaves(),
            ghosts: r.layer.total_ghosts(),
            agrees: r.mirrors == v2.mirrors,
        })
        .collect())
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut s = String::from("algo,seconds,visited_leaves,total_leaves,ghosts,agrees\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.6},{},{},{},{}",
            r.algo, r.seconds, r.visited_leaves, r.total_leaves, r.ghosts, r.agrees
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub ranks: usize,
    pub leaves: usize,
    pub mean_ghosts: f64,
    pub seconds: f64,
    /// Relative to the first run with ghosts; `None` before it.
    pub efficiency: Option<f64>,
}

/// The scenario at several rank counts. Efficiency is relative to the first
/// run that has ghosts, since the formula divides by its ghost count.
pub fn bench(cfg: &ScenarioConfig, scheme: Scheme, ranks: &[usize]) -> Result<Vec<BenchRow>, HarnessError> {
    let mut out: Vec<BenchRow> = Vec::new();
    let mut reference: Option<(f64, f64)> = None;
    for &p in ranks {
        let c = ScenarioConfig { ranks: p, ..cfg.clone() };
        let r = run_scenario(&c, scheme, false)?;
        let g = r.mean_ghosts();
        if reference.is_none() && g > 0.0 {
            reference = Some((r.seconds, g));
        }
        out.push(BenchRow {
            ranks: p,
            leaves: r.total_leaves,
            mean_ghosts: g,
            seconds: r.seconds,
            efficiency: reference.map(|(t1, g1)| efficiency(t1, g1, r.seconds, g)),
        });
    }
    Ok(out)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("ranks,leaves,mean_ghosts,seconds,efficiency\n");
    for r in rows {
        let e = r.efficiency.map_or(String::new(), |e| format!("{e:.4}"));
        let _ = writeln!(s, "{},{},{:.3},{:.6},{e}", r.ranks, r.leaves, r.mean_ghosts, r.seconds);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let c = ScenarioConfig {
            cmesh: "tet_cube".into(),
            level: 3,
            extra_levels: 2,
            pattern: Pattern::Band { step: 2.0 },
            ranks: 7,
            algo: Algorithm::V2,
            balance: true,
            seed: 9,
        };
        assert_eq!(ScenarioConfig::parse(&c.to_text()).unwrap(), c);
        assert!(ScenarioConfig::parse("colour=red").is_err());
        assert_eq!("third:2".parse::<Pattern>().unwrap(), Pattern::EveryThird { rounds: 2 });
        assert!("band".parse::<Pattern>().is_err());
    }

    #[test]
    fn efficiency_formula() {
        assert_eq!(efficiency(2.0, 10.0, 4.0, 30.0), 1.5);
    }

    #[test]
    fn band_offsets() {
        let b = Band::default();
        assert!((b.time_step(3) - 6.4).abs() < 1e-12);
        assert!((b.offset(3, 0.0) - 0.31).abs() < 1e-12);
        assert!((b.offset(3, 2.0) - 0.51).abs() < 1e-12);
    }

    #[test]
    fn uniform_scenario_verifies() {
        let c = ScenarioConfig { ranks: 4, ..Default::default() };
        let r = run_scenario(&c, Scheme::default(), true).unwrap();
        assert!(r.verification.unwrap().passed());
        assert_eq!(r.rows.iter().map(|r| r.elements).sum::<usize>(), 64);
    }
}
