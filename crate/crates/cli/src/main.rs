use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use susy8v::config::{parse_lengths, parse_real, RunConfig, UsageError};
use susy8v::print::{print_object, Kind, PrintError, PrintParams};
use susy8v::{exit, run_suite};

#[derive(Parser)]
#[command(name = "susy8v", version, about = "Verify the supersymmetric eight-vertex model on finite chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run check suites over a parameter grid and emit a report.
    Run(RunArgs),
    /// Print one construction as a table.
    Print(PrintArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated suite names, or `all`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    t: Option<String>,
    /// Lengths such as `1..6` or `2,4,8`.
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Tolerance override `check=value`; repeatable.
    #[arg(long = "tol", value_name = "CHECK=VALUE")]
    tol: Vec<String>,
}

#[derive(Args)]
struct PrintArgs {
    /// weights, kmatrix, hamiltonian, transfer or singlet.
    kind: String,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    /// Boundary parameter for kmatrix.
    #[arg(long)]
    y: Option<String>,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn usage(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("susy8v: usage error: {e}");
    ExitCode::from(exit::USAGE as u8)
}

fn build_config(a: &RunArgs) -> Result<RunConfig, UsageError> {
    let mut c = RunConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError::new("config", format!("{}: {e}", path.display())))?;
        c.apply_file(&text)?;
    }
    let flags = [
        ("suite", &a.suite),
        ("p", &a.p),
        ("u", &a.u),
        ("t", &a.t),
        ("L", &a.l),
        ("seed", &a.seed),
        ("out", &a.out),
        ("format", &a.format),
        ("threads", &a.threads),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            c.set(k, v)?;
        }
    }
    for item in &a.tol {
        let (k, v) = item.split_once('=').ok_or_else(|| UsageError::new("tol", format!("expected CHECK=VALUE, got `{item}`")))?;
        c.set(&format!("tol.{}", k.trim()), v)?;
    }
    Ok(c)
}

fn run(a: RunArgs) -> ExitCode {
    let config = match build_config(&a) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let out = config.output.clone();
    let format = config.format;
    let doc = match run_suite(config) {
        Ok(d) => d,
        Err(e) => return usage(e),
    };
    for name in doc.config.tolerances.keys() {
        if !doc.records.iter().any(|r| &r.check == name) {
            eprintln!("susy8v: warning: tolerance override `{name}` matched no check");
        }
    }
    let text = doc.render(format);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                return usage(format!("out: {}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    let s = doc.summary;
    eprintln!("susy8v: {} pass, {} fail, {} inconclusive", s.pass, s.fail, s.inconclusive);
    ExitCode::from(doc.exit_code() as u8)
}

fn print_params(a: &PrintArgs) -> Result<PrintParams, UsageError> {
    let mut prm = PrintParams::default();
    if let Some(v) = &a.p {
        prm.p = parse_real("p", v)?;
    }
    if let Some(v) = &a.u {
        prm.u = parse_real("u", v)?;
    }
    if let Some(v) = &a.t {
        prm.t = parse_real("t", v)?;
    }
    if let Some(v) = &a.l {
        match parse_lengths(v)?.as_slice() {
            [l] => prm.l = *l,
            _ => return Err(UsageError::new("L", "print takes a single length")),
        }
    }
    if let Some(v) = &a.y {
        prm.y = Some(parse_real("y", v)?);
    }
    Ok(prm)
}

fn print(a: PrintArgs) -> ExitCode {
    let prepared = a.kind.parse::<Kind>().and_then(|k| Ok((k, print_params(&a)?)));
    let (kind, prm) = match prepared {
        Ok(x) => x,
        Err(e) => return usage(e),
    };
    match print_object(kind, &prm) {
        Ok(table) => {
            print!("{}", table.text);
            if let Some(path) = &a.csv {
                if let Err(e) = std::fs::write(path, table.to_csv()) {
                    return usage(format!("csv: {}: {e}", path.display()));
                }
            }
            ExitCode::SUCCESS
        }
        Err(PrintError::Usage(e)) => usage(e),
        Err(PrintError::Compute(e)) => usage(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match cli.command {
        Command::Run(a) => run(a),
        Command::Print(a) => print(a),
    }
}
