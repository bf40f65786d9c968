use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;
use wwlab_core::scenario::{self, exit_code_for, Outcome, ScenarioConfig, EXIT_OK, EXIT_SCHEMA};
use wwlab_core::Error;

#[derive(Parser)]
#[command(name = "wwlab", version, about = "Wiener-Wintner experiments on tracial matrix algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario configs (JSON files or bundled scenario names).
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output root; reports go to <out>/<scenario>/<experiment>/.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace the root seed of every config.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Treat warnings as failures.
        #[arg(long)]
        strict: bool,
    },
    /// List bundled scenarios.
    ListScenarios {
        #[arg(long)]
        json: bool,
    },
    /// Print the config of a bundled scenario.
    Show { name: String },
}

fn load(spec: &str) -> Result<ScenarioConfig, Error> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{spec}: {e}")))?;
        return ScenarioConfig::from_json(&text);
    }
    scenario::bundled(spec).ok_or_else(|| Error::Config(format!("{spec}: no such file or bundled scenario")))
}

fn write_artifacts(out: &Path, o: &Outcome, meta: serde_json::Value) -> std::io::Result<PathBuf> {
    let dir = out.join(&o.scenario).join(o.experiment.as_str());
    fs::create_dir_all(&dir)?;
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("json value serializes") + "\n";
    fs::write(dir.join("report.json"), pretty(&o.report))?;
    fs::write(dir.join("table.csv"), &o.table_csv)?;
    fs::write(dir.join("meta.json"), pretty(&meta))?;
    Ok(dir)
}

fn run_one(spec: &str, out: &Path, seed: Option<u64>, strict: bool) -> i32 {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let outcome = load(spec).and_then(|cfg| scenario::run(&cfg, seed));
    let o = match outcome {
        Ok(o) => o,
        Err(e) => {
            let code = exit_code_for(&e);
            eprintln!("{spec}: error: {e}");
            println!("{spec} ERROR exit={code}");
            return code;
        }
    };
    let code = o.exit_code(strict);
    let mut meta = o.meta.clone();
    meta["started_unix"] = json!(started);
    meta["elapsed_seconds"] = json!(clock.elapsed().as_secs_f64());
    meta["strict"] = json!(strict);
    meta["exit_code"] = json!(code);
    meta["threads"] = json!(rayon::current_num_threads());
    match write_artifacts(out, &o, meta) {
        Ok(dir) => {
            for w in &o.warnings {
                eprintln!("{}: warning: {w}", o.scenario);
            }
            let status = if code == EXIT_OK { "PASS" } else { "FAIL" };
            println!("{} {} {status} exit={code} {}", o.scenario, o.experiment.as_str(), dir.display());
            code
        }
        Err(e) => {
            eprintln!("{}: cannot write artifacts: {e}", o.scenario);
            EXIT_SCHEMA
        }
    }
}

fn list(json: bool) {
    let rows = scenario::list_scenarios();
    if json {
        println!("{}", serde_json::to_string_pretty(rows).expect("static table serializes"));
        return;
    }
    println!("{:<24} {:<24} {:<10} SUMMARY", "NAME", "ANCHOR", "RUNTIME");
    for b in rows {
        println!("{:<24} {:<24} {:<10} {}", b.name, b.anchor, b.expected_runtime, b.summary);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::ListScenarios { json } => {
            list(json);
            EXIT_OK
        }
        Command::Show { name } => match scenario::bundled(&name) {
            Some(cfg) => {
                println!("{}", cfg.to_json());
                EXIT_OK
            }
            None => {
                eprintln!("{name}: no such bundled scenario");
                EXIT_SCHEMA
            }
        },
        Command::Run { configs, out, seed_override, threads, strict } => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                builder = builder.num_threads(t.max(1));
            }
            match builder.build() {
                Ok(pool) => pool.install(|| {
                    configs.par_iter().map(|c| run_one(c, &out, seed_override, strict)).collect::<Vec<_>>()
                }),
                Err(e) => {
                    eprintln!("cannot start thread pool: {e}");
                    vec![EXIT_SCHEMA]
                }
            }
            .into_iter()
            .max()
            .unwrap_or(EXIT_OK)
        }
    };
    ExitCode::from(code as u8)
}
