//! Command-line front end. Exit codes: 0 success, 1 invalid input, 2 failed verification.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::element::{Scheme, Shape};
use crate::ghost::{verify, Algorithm};
use crate::harness::{
    bench, bench_csv, build_forest, compare_algorithms, compare_csv, run_ghost, HarnessError, Pattern, RunReport,
    ScenarioConfig,
};
use crate::tabulate::{tables, TABLE_NAMES};
use crate::vtk::vtk_string;

#[derive(Debug, Parser)]
#[command(name = "hyghost", version, about = "Ghost layers for adaptive hybrid forest meshes on simulated ranks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a forest and print its leaves
    Gen {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct the ghost layer and print per-rank statistics as CSV
    Ghost {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Compare against the brute-force oracle
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run all applicable algorithms on one forest
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the selected algorithm against the oracle
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Print the face kernel tables
    Tables {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(TABLE_NAMES))]
        table: Option<String>,
        #[arg(long)]
        shape: Option<String>,
        /// Compare with a reference file instead of printing
        #[arg(long)]
        check: Option<PathBuf>,
    },
    /// Write the forest as a legacy VTK file
    Export {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "vtk", value_parser = ["vtk"])]
        format: String,
        #[arg(long)]
        out: PathBuf,
        /// Append the ghosts of this rank and flag them
        #[arg(long)]
        ghosts_of: Option<usize>,
    },
    /// Ghost phase timings for several rank counts
    Bench {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated rank counts
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        ranks_list: Vec<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// key=value scenario file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin name or coarse mesh file
    #[arg(long)]
    cmesh: Option<String>,
    #[arg(long)]
    level: Option<u8>,
    #[arg(long)]
    extra_levels: Option<u8>,
    /// uniform | third:R | band:t | shell
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    ranks: Option<usize>,
    /// v1 | v2 | v3
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    balance: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

impl ScenarioArgs {
    fn config(&self) -> Result<ScenarioConfig, HarnessError> {
        let mut c = match &self.config {
            Some(p) => ScenarioConfig::parse(&std::fs::read_to_string(p)?)?,
            None => ScenarioConfig::default(),
        };
        if let Some(v) = &self.cmesh {
            c.cmesh = v.clone();
        }
        if let Some(v) = self.level {
            c.level = v;
        }
        if let Some(v) = self.extra_levels {
            c.extra_levels = v;
        }
        if let Some(v) = &self.pattern {
            c.pattern = v.parse::<Pattern>()?;
        }
        if let Some(v) = self.ranks {
            c.ranks = v;
        }
        if let Some(v) = &self.algo {
            c.algo = v.parse::<Algorithm>()?;
        }
        c.balance |= self.balance;
        if let Some(v) = self.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

enum Failure {
    Invalid(String),
    Verification(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn emit(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let scheme = Scheme::from_env()?;
    match cmd {
        Command::Gen { scenario, out: path } => {
            let f = build_forest(&scenario.config()?, scheme)?;
            emit(path.as_ref(), &f.dump(), out)?;
            writeln!(err, "{} leaves on {} ranks", f.num_leaves(), f.num_ranks())?;
        }
        Command::Ghost { scenario, verify: check, output } => {
            let cfg = scenario.config()?;
            let f = build_forest(&cfg, scheme)?;
            let run = run_ghost(&f, cfg.algo)?;
            let mut report = RunReport::from_run(cfg, &f, &run);
            if check {
                report.verification = Some(verify(&f, &run.mirrors)?);
            }
            emit(output.csv.as_ref(), &report.csv(), out)?;
            if let Some(p) = &output.json {
                std::fs::write(p, serde_json::to_string_pretty(&report.json(None))? + "\n")?;
            }
            if let Some(v) = &report.verification {
                if !v.passed() {
                    return Err(Failure::Verification(format!(
                        "{} mismatches against the oracle:\n{}",
                        v.mismatches,
                        v.diffs.join("\n")
                    )));
                }
                writeln!(err, "verified against oracle")?;
            }
        }
        Command::Compare { scenario, csv } => {
            let rows = compare_algorithms(&scenario.config()?, scheme)?;
            emit(csv.as_ref(), &compare_csv(&rows), out)?;
            if rows.iter().any(|r| !r.agrees) {
                return Err(Failure::Verification("algorithms disagree".into()));
            }
        }
        Command::Verify { scenario } => {
            let cfg = scenario.config()?;
            let f = build_forest(&cfg, scheme)?;
            let run = run_ghost(&f, cfg.algo)?;
            let v = verify(&f, &run.mirrors)?;
            if !v.passed() {
                return Err(Failure::Verification(format!(
                    "FAIL {} mismatches:\n{}",
                    v.mismatches,
                    v.diffs.join("\n")
                )));
            }
            writeln!(out, "PASS {} leaves, {} ghosts", f.num_leaves(), run.layer.total_ghosts())?;
        }
        Command::Tables { table, shape, check } => {
            let shape = shape.map(|s| s.parse::<Shape>()).transpose()?;
            let text = tables(table.as_deref(), shape);
            match check {
                Some(p) => {
                    let expected = std::fs::read_to_string(&p)?;
                    if expected != text {
                        let diff: Vec<String> = expected
                            .lines()
                            .zip(text.lines())
                            .enumerate()
                            .filter(|(_, (a, b))| a != b)
                            .take(10)
                            .map(|(i, (a, b))| format!("line {}: expected `{a}`, got `{b}`", i + 1))
                            .collect();
                        return Err(Failure::Verification(format!(
                            "tables differ from {}\n{}",
                            p.display(),
                            diff.join("\n")
                        )));
                    }
                    writeln!(out, "tables match {}", p.display())?;
                }
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Export { scenario, format: _, out: path, ghosts_of } => {
            let f = build_forest(&scenario.config()?, scheme)?;
            let text = match ghosts_of {
                Some(r) if r >= f.num_ranks() => {
                    return Err(Failure::Invalid(format!("rank {r} out of range")));
                }
                Some(r) => {
                    let run = run_ghost(&f, Algorithm::V3)?;
                    vtk_string(&f, Some((r, &run.layer)))?
                }
                None => vtk_string(&f, None)?,
            };
            std::fs::write(&path, text)?;
            writeln!(err, "wrote {}", path.display())?;
        }
        Command::Bench { scenario, ranks_list, csv } => {
            if ranks_list.contains(&0) {
                return Err(Failure::Invalid("rank counts must be positive".into()));
            }
            let rows = bench(&scenario.config()?, scheme, &ranks_list)?;
            emit(csv.as_ref(), &bench_csv(&rows), out)?;
        }
    }
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(Failure::Invalid(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Verification(m)) => {
            let _ = writeln!(err, "{m}");
            2
        }
    }
}
