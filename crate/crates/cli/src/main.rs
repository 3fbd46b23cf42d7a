use std::io::Read;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use histq_core::pathint::{propagation_distribution, GridSystem, TimeSlicing};
use histq_core::scenario::{self, Entry, QueryResult, ScenarioError, Value};

/// History-operator simulator for small quantum experiments.
#[derive(Parser)]
#[command(name = "histq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Hamiltonian {
    Free,
    Oscillator,
}

#[derive(Subcommand)]
enum Command {
    /// Run every query of a scenario file (`-` reads standard input).
    Run {
        file: String,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Parse and validate a scenario file without running its queries.
    Check { file: String },
    /// Time-sliced propagation on a coordinate grid.
    Pathint {
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        slices: usize,
        #[arg(long, value_enum)]
        hamiltonian: Hamiltonian,
        /// Total propagation time.
        #[arg(long)]
        t: f64,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// List the built-in scenarios, or print one.
    Examples { name: Option<String> },
}

const INVALID: u8 = 1;
const ENGINE: u8 = 2;

fn read_source(file: &str) -> Result<(String, String), String> {
    if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        return Ok(("stdin".into(), s));
    }
    let text = std::fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?;
    let name = Path::new(file).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((name, text))
}

fn emit(format: Format, name: &str, results: &[QueryResult]) {
    match format {
        Format::Json => print!("{}", scenario::to_json(name, results)),
        Format::Table => print!("{}", scenario::to_table(name, results)),
    }
}

fn report(file: &str, e: &ScenarioError) -> ExitCode {
    match e {
        ScenarioError::Invalid(diags) => {
            for d in diags {
                eprintln!("{file}:{d}");
            }
            ExitCode::from(INVALID)
        }
        ScenarioError::Engine { .. } => {
            eprintln!("{file}:{e}");
            ExitCode::from(ENGINE)
        }
    }
}

fn run(file: &str, format: Format) -> ExitCode {
    let (name, text) = match read_source(file) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INVALID);
        }
    };
    match scenario::run_text(&text) {
        Ok(results) => {
            emit(format, &name, &results);
            ExitCode::SUCCESS
        }
        Err(e) => report(file, &e),
    }
}

fn check(file: &str) -> ExitCode {
    let text = match read_source(file) {
        Ok((_, t)) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INVALID);
        }
    };
    match scenario::parse_syntax(&text).and_then(|doc| scenario::compile(&doc)) {
        Ok(sc) => {
            println!(
                "ok: dimension {}, {} slot(s), {} quer{}",
                sc.schedule.dim(),
                sc.schedule.slots().len(),
                sc.queries.len(),
                if sc.queries.len() == 1 { "y" } else { "ies" }
            );
            ExitCode::SUCCESS
        }
        Err(diags) => report(file, &ScenarioError::Invalid(diags)),
    }
}

#[allow(clippy::too_many_arguments)]
fn pathint(
    grid: usize,
    slices: usize,
    hamiltonian: Hamiltonian,
    t: f64,
    from: usize,
    to: Option<usize>,
    spacing: f64,
    format: Format,
) -> ExitCode {
    let invalid = |msg: String| {
        eprintln!("error: {msg}");
        ExitCode::from(INVALID)
    };
    if grid == 0 || grid > scenario::MAX_DIM {
        return invalid(format!("--grid must be in 1..={}", scenario::MAX_DIM));
    }
    if from >= grid || to.is_some_and(|j| j >= grid) {
        return invalid(format!("grid indices must be below {grid}"));
    }
    let ts = match TimeSlicing::new(0.0, t, slices) {
        Ok(ts) => ts,
        Err(e) => return invalid(e.to_string()),
    };
    let g = match hamiltonian {
        Hamiltonian::Free => GridSystem::free_particle(grid, spacing),
        Hamiltonian::Oscillator => GridSystem::harmonic_oscillator(grid, spacing),
    };
    let g = match g {
        Ok(g) => g,
        Err(e) => return invalid(e.to_string()),
    };
    let dist = match propagation_distribution(&g, &ts, from) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ENGINE);
        }
    };
    let ham = match hamiltonian {
        Hamiltonian::Free => "free",
        Hamiltonian::Oscillator => "oscillator",
    };
    let mut inputs = vec![
        format!("grid={grid}"),
        format!("slices={slices}"),
        format!("hamiltonian={ham}"),
        format!("t={t}"),
        format!("spacing={spacing}"),
        format!("from=q{from}"),
    ];
    let mut r = QueryResult::new(format!("propagate q{from}"), "pathint", Vec::new());
    if let Some(j) = to {
        inputs.push(format!("to=q{j}"));
        r.query = format!("propagate q{from} -> q{j}");
        r.value = Some(Value::real(dist[j]));
    }
    r.inputs = inputs;
    r.values = dist.iter().enumerate().map(|(q, &p)| Entry::new(format!("q{q}"), Value::real(p))).collect();
    emit(format, "pathint", &[r]);
    ExitCode::SUCCESS
}

fn examples(name: Option<String>) -> ExitCode {
    match name {
        None => {
            for (n, _) in scenario::GOLDEN {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Some(n) => match scenario::golden_source(&n) {
            Some(src) => {
                print!("{src}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: no built-in scenario named `{n}` (try `histq examples`)");
                ExitCode::from(INVALID)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { file, format } => run(&file, format),
        Command::Check { file } => check(&file),
        Command::Pathint { grid, slices, hamiltonian, t, from, to, spacing, format } => {
            pathint(grid, slices, hamiltonian, t, from, to, spacing, format)
        }
        Command::Examples { name } => examples(name),
    }
}
