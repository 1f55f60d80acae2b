// SPDX-License-Identifier: Apache-2.0

//! `qlc`: batch driver for the qlc quantum compiler.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use qlc_core::emit::parse_cqasm;
use qlc_core::examples::{builtin, BUILTIN_NAMES};
use qlc_core::ir::Program;
use qlc_core::pipeline::{compile, CompileOptions, CompileOutput, Pass};
use qlc_core::platform::Platform;
use qlc_core::schedule::ScheduleMode;
use qlc_core::sim::{simulate, StateVector};

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_PASS: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "qlc",
    version,
    about = "Compile quantum kernels to cQASM with a timing trace"
)]
struct Cli {
    /// Hardware configuration (JSON). Without it the compilation is
    /// technology-independent and no timing trace is produced.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Program in the cQASM subset.
    #[arg(
        long = "in",
        value_name = "PATH",
        conflicts_with = "example",
        required_unless_present = "example"
    )]
    input: Option<PathBuf>,

    /// Built-in example program.
    #[arg(long, value_name = "NAME")]
    example: Option<String>,

    /// Comma-separated subset of decompose,optimize,map,schedule. They
    /// always run in that order.
    #[arg(
        long,
        value_name = "LIST",
        value_delimiter = ',',
        default_value = "decompose,optimize,map,schedule"
    )]
    passes: Vec<Pass>,

    #[arg(long, value_name = "MODE", default_value = "alap")]
    schedule: ScheduleMode,

    /// Respect the resource model of the configuration while scheduling.
    #[arg(long)]
    resource_constrained: bool,

    /// Optimizer tolerance for replacing a run of gates.
    #[arg(long, value_name = "F", default_value_t = 1e-9)]
    epsilon: f64,

    /// Optimizer window size.
    #[arg(long, value_name = "N", default_value_t = 8)]
    window: usize,

    /// Write cQASM here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out_cqasm: Option<PathBuf>,

    /// Timing trace; tab-separated unless `--timing-json` is given or the
    /// path ends in `.json`.
    #[arg(long, value_name = "PATH")]
    out_timing: Option<PathBuf>,

    #[arg(long)]
    timing_json: bool,

    /// Per-pass report as JSON.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,

    /// Print the state vector reached by the unitary part of the compiled
    /// program, starting from all zeros.
    #[arg(long)]
    dump_state: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qlc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.window == 0 {
        return Err(Failure::new(EXIT_USAGE, "--window must be at least 1"));
    }
    if cli.epsilon.is_nan() || cli.epsilon < 0.0 {
        return Err(Failure::new(EXIT_USAGE, "--epsilon must be non-negative"));
    }
    let platform = match &cli.config {
        Some(path) => Some(Platform::from_file(path).map_err(|e| {
            let e = qlc_core::Error::from(e);
            Failure::new(EXIT_CONFIG, format!("{}: {e}", e.code()))
        })?),
        None => None,
    };
    let mut program = load_program(cli, platform.as_ref())?;
    if let Some(p) = &platform {
        program.platform = Some(Arc::new(p.clone()));
    }
    let options = CompileOptions {
        schedule_mode: cli.schedule,
        resource_constrained: cli.resource_constrained,
        epsilon: cli.epsilon,
        window: cli.window,
        ..CompileOptions::with_passes(&cli.passes)
    };
    let out = compile(&program, platform.as_ref(), &options)
        .map_err(|e| Failure::new(EXIT_PASS, format!("{}: {e}", e.code())))?;
    write_artifacts(cli, &out)?;
    eprint!("{}", out.report_text());
    if cli.dump_state {
        print!("{}", dump_state(&out.program)?);
    }
    Ok(())
}

fn load_program(cli: &Cli, platform: Option<&Platform>) -> Result<Program, Failure> {
    if let Some(name) = &cli.example {
        return builtin(name).ok_or_else(|| {
            Failure::new(
                EXIT_INPUT,
                format!(
                    "unknown example `{name}` (available: {})",
                    BUILTIN_NAMES.join(", ")
                ),
            )
        });
    }
    let path = cli
        .input
        .as_deref()
        .expect("clap requires --in or --example");
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read `{}`: {e}", path.display())))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("program");
    parse_cqasm(&text, name, platform).map_err(|e| {
        let e = qlc_core::Error::from(e);
        Failure::new(EXIT_INPUT, format!("{}: {}: {e}", e.code(), path.display()))
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_PASS, format!("cannot write `{}`: {e}", path.display())))
}

fn write_artifacts(cli: &Cli, out: &CompileOutput) -> Result<(), Failure> {
    match &cli.out_cqasm {
        Some(path) => write_file(path, &out.cqasm)?,
        None if !cli.dump_state => print!("{}", out.cqasm),
        None => {}
    }
    if let Some(path) = &cli.out_timing {
        let trace = out.timing.as_ref().ok_or_else(|| {
            Failure::new(
                EXIT_USAGE,
                "--out-timing needs --config and the schedule pass",
            )
        })?;
        let body = if cli.timing_json || path.extension().is_some_and(|e| e == "json") {
            serde_json::to_string_pretty(&trace.to_json()).expect("trace serializes") + "\n"
        } else {
            trace.to_tsv()
        };
        write_file(path, &body)?;
    }
    if let Some(path) = &cli.report {
        let body = serde_json::to_string_pretty(&out.report_json()).expect("report serializes");
        write_file(path, &(body + "\n"))?;
    }
    Ok(())
}

fn dump_state(program: &Program) -> Result<String, Failure> {
    let unitary: Vec<_> = program
        .kernels()
        .iter()
        .flat_map(|k| {
            let reps = k.iterations.unwrap_or(1) as usize;
            std::iter::repeat_n(k.gates(), reps).flatten()
        })
        .filter(|g| g.has_matrix())
        .cloned()
        .collect();
    let n = program.qubit_count;
    let state = StateVector::zero(n)
        .and_then(|s| simulate(&unitary, n, Some(&s)))
        .map_err(|e| {
            let e = qlc_core::Error::from(e);
            Failure::new(EXIT_PASS, format!("{}: {e}", e.code()))
        })?;
    let mut text = String::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm() > 1e-12 {
            let _ = writeln!(text, "|{i:0n$b}> {:+.6} {:+.6}i", a.re, a.im);
        }
    }
    Ok(text)
}
