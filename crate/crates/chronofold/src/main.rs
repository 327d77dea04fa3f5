//! Thin command-line front end over the library; `examples/` shows the API
//! itself. Exit codes: 0 all checks passed, 1 an expectation or invariant
//! failed, 2 the input or invocation was unusable.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chronofold::dump::{self, What};
use chronofold::fuzz::FuzzConfig;
use chronofold::script::{execute_scenario, Scenario, ScriptError};
use chronofold::{fuzz, Author, Doc};

#[derive(Parser)]
#[command(name = "cfold", version, about = "Replicated text engine: run scenarios, fuzz, benchmark, and dump documents")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a scenario file and print its transcript.
    Run { file: PathBuf },
    /// Generate a random scenario and check every convergence invariant.
    Fuzz {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        replicas: u32,
        #[arg(long, default_value_t = 100)]
        ops: u32,
        /// Also check every prefix version and sampled version diffs.
        #[arg(long)]
        deep: bool,
    },
    /// Time local typing, mid-document insertion, and batch merge.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        chars: u32,
    },
    /// Print a view of a document. Scenario files are executed first;
    /// CFLD1 files are loaded as saved.
    Dump {
        file: PathBuf,
        #[arg(long, default_value = "text")]
        what: What,
        /// Replica to inspect when the input is a scenario
        /// (default: the first declared).
        #[arg(long)]
        replica: Option<String>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run { file } => run(&file),
        Cmd::Fuzz { seed, replicas, ops, deep } => {
            let mut cfg = FuzzConfig::new(seed, replicas, ops);
            if deep {
                cfg = cfg.deep();
            }
            let report = fuzz::fuzz_one(&cfg);
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Cmd::Bench { chars } => {
            for result in chronofold::bench::run_all(chars) {
                println!("{result}");
            }
            ExitCode::SUCCESS
        }
        Cmd::Dump { file, what, replica } => dump_cmd(&file, what, replica.as_deref()),
    }
}

fn run(file: &PathBuf) -> ExitCode {
    let src = match fs::read_to_string(file) {
        Ok(src) => src,
        Err(e) => return usage_error(&format!("{}: {e}", file.display())),
    };
    match chronofold::script::run_script(&src) {
        Ok(transcript) => {
            print!("{}", transcript.render());
            if transcript.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(ScriptError::Parse(e)) => usage_error(&e.to_string()),
        Err(e @ ScriptError::Step { .. }) => {
            eprintln!("cfold: {e}");
            ExitCode::from(1)
        }
    }
}

fn dump_cmd(file: &PathBuf, what: What, replica: Option<&str>) -> ExitCode {
    let src = match fs::read_to_string(file) {
        Ok(src) => src,
        Err(e) => return usage_error(&format!("{}: {e}", file.display())),
    };
    let doc = if src.starts_with("CFLD1") {
        if replica.is_some() {
            return usage_error("--replica applies to scenario input, not saved dumps");
        }
        match dump::load(&src) {
            Ok(doc) => doc,
            Err(e) => return usage_error(&e.to_string()),
        }
    } else {
        match scenario_doc(&src, replica) {
            Ok(doc) => doc,
            Err(msg) => return usage_error(&msg),
        }
    };
    print!("{}", dump::dump(&doc, what));
    ExitCode::SUCCESS
}

fn scenario_doc(src: &str, replica: Option<&str>) -> Result<Doc, String> {
    let scenario = Scenario::parse(src).map_err(|e| e.to_string())?;
    let (_, engine) = execute_scenario(&scenario).map_err(|e| e.to_string())?;
    let name = match replica {
        Some(name) => Author::new(name).map_err(|e| e.to_string())?,
        None => *engine.replicas().first().ok_or("scenario declares no replicas")?,
    };
    engine
        .doc(name)
        .cloned()
        .ok_or_else(|| format!("replica {name} is not declared in the scenario"))
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("cfold: {msg}");
    ExitCode::from(2)
}
