use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use filtsens::cli::{analyze, paper_suite, parse_spec, AnalysisReport, AnalyzeSettings, SuiteSettings};
use filtsens::sysmodel::DEFAULT_SEED;

const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(name = "filtsens", version, about = "Log-sensitivity integrals of LTI filtering systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one or more system description files
    Analyze(AnalyzeArgs),
    /// Reproduce the nine worked examples and compare with their published values
    PaperSuite(SuiteArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Run the quadrature oracle (the default unless a document disables it)
    #[arg(long, overrides_with = "no_quadrature")]
    quadrature: bool,
    #[arg(long)]
    no_quadrature: bool,
    /// Also run the residue-style cross-check (CT only)
    #[arg(long)]
    lemma1: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Quadrature tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for the complementarity sampling check
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps_gain: Option<f64>,
    #[arg(long)]
    no_quadrature: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

enum FileOutcome {
    Report(Box<AnalysisReport>),
    Unreadable(String),
}

fn run_analyze(args: AnalyzeArgs) -> ExitCode {
    let settings = AnalyzeSettings {
        quadrature: if args.no_quadrature {
            Some(false)
        } else if args.quadrature {
            Some(true)
        } else {
            None
        },
        lemma1: args.lemma1.then_some(true),
        quad_tol: args.tol,
        eps_gain: None,
        seed: args.seed,
    };
    let outcomes: Vec<FileOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = args
            .files
            .iter()
            .map(|path| {
                let settings = &settings;
                scope.spawn(move || {
                    let text = match std::fs::read_to_string(path) {
                        Ok(t) => t,
                        Err(e) => return FileOutcome::Unreadable(e.to_string()),
                    };
                    match parse_spec(&text) {
                        Ok(doc) => FileOutcome::Report(Box::new(analyze(&doc, settings))),
                        Err(e) => FileOutcome::Unreadable(e.to_string()),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });

    let mut code = 0u8;
    let mut json_out = Vec::new();
    for (path, outcome) in args.files.iter().zip(&outcomes) {
        let file = path.display().to_string();
        match outcome {
            FileOutcome::Report(r) => {
                code = code.max(r.exit_code() as u8);
                match args.format {
                    Format::Text => {
                        if args.files.len() > 1 {
                            println!("== {file}");
                        }
                        print!("{r}");
                    }
                    Format::Json => {
                        let mut v = serde_json::to_value(r.as_ref()).expect("report serializes");
                        v["file"] = json!(file);
                        json_out.push(v);
                    }
                }
            }
            FileOutcome::Unreadable(msg) => {
                code = code.max(EXIT_PARSE);
                match args.format {
                    Format::Text => eprintln!("{file}: {msg}"),
                    Format::Json => json_out.push(json!({ "file": file, "error": msg })),
                }
            }
        }
    }
    if let Format::Json = args.format {
        let doc = if json_out.len() == 1 { json_out.pop().unwrap() } else { json!(json_out) };
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    }
    ExitCode::from(code)
}

fn run_suite(args: SuiteArgs) -> ExitCode {
    let report =
        paper_suite(&SuiteSettings { quadrature: !args.no_quadrature, quad_tol: args.tol, eps_gain: args.eps_gain });
    match args.format {
        Format::Text => print!("{report}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("json")),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::PaperSuite(s) => run_suite(s),
    }
}
